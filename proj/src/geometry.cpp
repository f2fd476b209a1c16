#include "isomix/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace isomix {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist_point_segment(const Point2& p, const Point2& a, const Point2& b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double px = a.x + t * dx - p.x, py = a.y + t * dy - p.y;
    return std::sqrt(px * px + py * py);
}

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point2& a, const Point2& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    const int n = static_cast<int>(pts.size());
    if (n <= 2) return pts;

    std::vector<Point2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (int i = n - 2, lower = k + 1; i >= 0; --i) {  // upper chain
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() <= 2) {
        // All points collinear: keep the extreme segment endpoints.
        return {pts.front(), pts.back()};
    }
    return hull;
}

bool point_in_convex_polygon(const Point2& p, const std::vector<Point2>& hull,
                             double tol) {
    if (hull.empty()) return false;
    if (hull.size() == 1)
        return std::hypot(p.x - hull[0].x, p.y - hull[0].y) <= tol;
    if (hull.size() == 2) return dist_point_segment(p, hull[0], hull[1]) <= tol;
    const int n = static_cast<int>(hull.size());
    for (int i = 0; i < n; ++i) {
        const Point2& a = hull[i];
        const Point2& b = hull[(i + 1) % n];
        // Hull is counter-clockwise; a point strictly right of any edge is
        // outside.  The tolerance keeps boundary points (vertices included)
        // classified inside.
        double c = cross(a, b, p);
        double scale = std::max({1.0, std::abs(a.x), std::abs(a.y), std::abs(b.x),
                                 std::abs(b.y), std::abs(p.x), std::abs(p.y)});
        if (c < -tol * scale) return false;
    }
    return true;
}

GeometryReport validate_geometry(const SimmInput& input, double tol) {
    const int N = input.n_obs(), J = input.n_tracers(), K = input.n_sources();
    if (J < 2)
        fail(ErrorCode::invalid_argument,
             "geometry check needs at least two tracers");

    MatrixXd adjusted = input.mu_s + input.mu_c;  // K x J TDF-adjusted means

    GeometryReport report;
    report.inside.assign(N, true);

    for (int j1 = 0; j1 < J; ++j1) {
        for (int j2 = j1 + 1; j2 < J; ++j2) {
            std::vector<Point2> corners;
            corners.reserve(K);
            for (int k = 0; k < K; ++k)
                corners.push_back({adjusted(k, j1), adjusted(k, j2)});
            auto hull = convex_hull(corners);
            if (hull.size() < 3) {
                report.degenerate = true;
                report.warnings.push_back(
                    "degenerate polygon for tracers " + input.tracer_names[j1] +
                    "/" + input.tracer_names[j2] +
                    ": source means are collinear; testing distance to segment");
            }
            for (int i = 0; i < N; ++i) {
                Point2 p{input.y(i, j1), input.y(i, j2)};
                // Degenerate hulls use a coarser, data-scaled tolerance since
                // measurement noise guarantees points off the exact segment.
                double t = hull.size() < 3
                               ? std::max(tol, 1e-6 * (1.0 + adjusted.cwiseAbs().maxCoeff()))
                               : tol;
                if (!point_in_convex_polygon(p, hull, t)) report.inside[i] = false;
            }
            report.hulls.push_back({j1, j2, std::move(hull)});
        }
    }
    for (int i = 0; i < N; ++i)
        if (!report.inside[i]) report.outside.push_back(i + 1);
    if (!report.outside.empty()) {
        std::string msg = "observations outside the mixing polygon:";
        for (int id : report.outside) msg += " " + std::to_string(id);
        report.warnings.push_back(msg);
    }
    return report;
}

Table GeometryReport::to_table() const {
    Table t({"obs", "inside"});
    for (std::size_t i = 0; i < inside.size(); ++i)
        t.add_row({static_cast<double>(i + 1), std::string(inside[i] ? "yes" : "no")});
    return t;
}

Table isospace_plot_data(const SimmInput& input, int j1, int j2,
                         const std::string& color_by) {
    const int J = input.n_tracers();
    if (j1 == j2 || j1 < 0 || j2 < 0 || j1 >= J || j2 >= J)
        fail(ErrorCode::invalid_argument,
             "tracer pair (" + std::to_string(j1) + "," + std::to_string(j2) +
                 ") invalid for " + std::to_string(J) + " tracers");

    int color_col = -1;
    if (!color_by.empty()) {
        for (std::size_t c = 0; c < input.covariate_columns.size(); ++c)
            if (input.covariate_columns[c] == color_by)
                color_col = static_cast<int>(c);
        if (color_col < 0) {
            std::string have;
            for (std::size_t c = 0; c < input.covariate_columns.size(); ++c)
                have += (c ? ", " : "") + input.covariate_columns[c];
            fail(ErrorCode::invalid_argument,
                 "unknown covariate '" + color_by + "' (available: " +
                     (have.empty() ? "none" : have) + ")");
        }
    }

    Table t({"kind", "label", "x", "y", "x_lo", "x_hi", "y_lo", "y_hi", "color"});
    for (int i = 0; i < input.n_obs(); ++i) {
        std::string color;
        if (color_col >= 0) color = input.covariate_rows[i][color_col];
        t.add_row({std::string("mixture"), std::string("obs ") + std::to_string(i + 1),
                   input.y(i, j1), input.y(i, j2), input.y(i, j1), input.y(i, j1),
                   input.y(i, j2), input.y(i, j2), color});
    }
    for (int k = 0; k < input.n_sources(); ++k) {
        double mx = input.mu_s(k, j1) + input.mu_c(k, j1);
        double my = input.mu_s(k, j2) + input.mu_c(k, j2);
        double sx = std::sqrt(std::pow(input.sigma_s(k, j1), 2) +
                              std::pow(input.sigma_c(k, j1), 2));
        double sy = std::sqrt(std::pow(input.sigma_s(k, j2), 2) +
                              std::pow(input.sigma_c(k, j2), 2));
        t.add_row({std::string("source"), input.source_names[k], mx, my, mx - sx,
                   mx + sx, my - sy, my + sy, std::string()});
    }
    return t;
}

}  // namespace isomix
