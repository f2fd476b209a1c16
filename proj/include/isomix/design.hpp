#pragma once

#include "isomix/csv.hpp"
#include "isomix/types.hpp"

namespace isomix {

struct DesignMatrix {
    MatrixXd X;
    DesignMeta meta;
};

// Builds the regression design matrix from a raw covariate table.
//
// Column order is deterministic: intercept first, then each covariate in
// spec order.  Continuous covariates are standardized to mean 0 / sample
// sd 1 (constants kept in the metadata so new rows are encoded identically).
// Categorical covariates use level order of first appearance; when a single
// categorical is the only covariate it is one-hot encoded over all levels
// and the intercept is dropped, otherwise the first level is the reference
// (treatment coding) and the intercept stays.
DesignMatrix build_design_matrix(const CsvTable& raw, const CovariateSpec& spec);

// Encodes new raw rows with the constants captured at build time.  Unseen
// categorical levels and missing columns are errors that name the offender.
MatrixXd encode_rows(const CsvTable& raw, const DesignMeta& meta);

// Intercept-only design for a dataset with no covariate table.
DesignMatrix intercept_only_design(int n_rows);

}  // namespace isomix
