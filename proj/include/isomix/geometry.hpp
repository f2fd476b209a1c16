#pragma once

#include <string>
#include <vector>

#include "isomix/table.hpp"
#include "isomix/types.hpp"

namespace isomix {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Convex hull (counter-clockwise, no repeated last point) via Andrew's
// monotone chain.  Collinear input degenerates to the extreme segment.
std::vector<Point2> convex_hull(std::vector<Point2> points);

// Boundary-inclusive point-in-convex-polygon test.  A degenerate "polygon"
// of one or two distinct vertices is treated as a point/segment and tested
// by distance <= tol.
bool point_in_convex_polygon(const Point2& p, const std::vector<Point2>& hull,
                             double tol = 1e-9);

// Checks that every mixture observation lies inside the mixing polygon: the
// convex hull of the TDF-adjusted source means, per tracer pair.  With more
// than two tracers an observation must be inside the hull for every pair.
// Advisory only -- callers decide what to do with outside observations.
struct GeometryReport {
    std::vector<bool> inside;          // per observation
    std::vector<int> outside;          // 1-based indices of outside obs
    bool degenerate = false;           // hull collapsed to a segment/point
    std::vector<std::string> warnings;
    // Hull vertices per tested tracer pair, for plotting.
    struct PairHull {
        int j1 = 0, j2 = 0;
        std::vector<Point2> vertices;
    };
    std::vector<PairHull> hulls;

    Table to_table() const;
};

GeometryReport validate_geometry(const SimmInput& input, double tol = 1e-9);

// Scatter data for an iso-space plot on tracers (j1, j2): each mixture point
// (raw y) and each source as the TDF-adjusted mean with +-1 sd bars.  An
// optional covariate supplies a per-mixture color scalar (raw values).
Table isospace_plot_data(const SimmInput& input, int j1, int j2,
                         const std::string& color_by = "");

}  // namespace isomix
