#pragma once

#include <optional>
#include <string>

#include "isomix/csv.hpp"
#include "isomix/design.hpp"
#include "isomix/types.hpp"

namespace isomix {

// Parses "name:kind[,name:kind...]" where kind is continuous|categorical.
CovariateSpec parse_covariate_spec(const std::string& text);

// Loads and aligns all input tables into a validated SimmInput.
//
//   mixtures.csv       N rows, one named column per tracer (defines J and
//                      the tracer order)
//   sources.csv        K rows: a "name" column plus mean_<tracer> and
//                      sd_<tracer> columns (defines K and the source order)
//   tdf.csv            optional, same shape as sources; defaults to zeros
//   concentration.csv  optional, same shape; mean_<tracer> used, defaults 1
//   covariates.csv     optional, N rows of named columns; omitted =>
//                      intercept-only design
//
// TDF and concentration rows are matched to sources by name, so row order
// may differ between the files.
struct DatasetPaths {
    std::string mixtures;
    std::string sources;
    std::optional<std::string> tdf;
    std::optional<std::string> concentration;
    std::optional<std::string> covariates;
};

SimmInput load_dataset(const DatasetPaths& paths, const CovariateSpec& spec);

// Same, from already-parsed tables (used by tests and the C API).
SimmInput assemble_dataset(const CsvTable& mixtures, const CsvTable& sources,
                           const std::optional<CsvTable>& tdf,
                           const std::optional<CsvTable>& concentration,
                           const std::optional<CsvTable>& covariates,
                           const CovariateSpec& spec);

}  // namespace isomix
