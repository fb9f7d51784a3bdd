#include "plab/geometry.hpp"
#include "plab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace plab {

std::size_t PointCloud::dim() const {
    if (points.empty()) throw GeometryError("empty point cloud has no dimension");
    return points.front().size();
}

void PointCloud::validate() const {
    if (points.empty()) throw GeometryError("point cloud must be nonempty");
    const std::size_t d = points.front().size();
    for (const auto& p : points) {
        if (p.size() != d) throw GeometryError("point cloud has mixed dimensions");
        for (double x : p)
            if (!std::isfinite(x)) throw GeometryError("point cloud has a non-finite coordinate");
    }
}

void PointCloud::save_csv(const std::string& csv_path, const std::string& meta_path) const {
    validate();
    std::ofstream out(csv_path);
    if (!out) throw GeometryError("cannot write " + csv_path);
    out.precision(17);
    for (const auto& p : points) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) out << ",";
            out << p[i];
        }
        out << "\n";
    }
    nlohmann::json meta{{"label", label},
                        {"norm_tag", norm_tag},
                        {"dim", dim()},
                        {"count", size()}};
    std::ofstream mo(meta_path);
    if (!mo) throw GeometryError("cannot write " + meta_path);
    mo << meta.dump(2) << "\n";
}

PointCloud PointCloud::load_csv(const std::string& csv_path, const std::string& meta_path) {
    PointCloud cloud;
    std::ifstream in(csv_path);
    if (!in) throw GeometryError("cannot open " + csv_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> p;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) p.push_back(std::stod(cell));
        cloud.points.push_back(std::move(p));
    }
    std::ifstream mi(meta_path);
    if (!mi) throw GeometryError("cannot open " + meta_path);
    nlohmann::json meta = nlohmann::json::parse(mi);
    cloud.label = meta.value("label", "");
    cloud.norm_tag = meta.value("norm_tag", "euclidean");
    cloud.validate();
    if (meta.contains("dim") && meta["dim"].get<std::size_t>() != cloud.dim())
        throw GeometryError("metadata dim mismatch for " + csv_path);
    if (meta.contains("count") && meta["count"].get<std::size_t>() != cloud.size())
        throw GeometryError("metadata count mismatch for " + csv_path);
    return cloud;
}

double point_dist(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw GeometryError("dimension mismatch in distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double point_norm(const std::vector<double>& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return std::sqrt(acc);
}

double hausdorff_semidist(const PointCloud& U, const PointCloud& V) {
    U.validate();
    V.validate();
    if (U.dim() != V.dim()) throw GeometryError("dimension mismatch between clouds");
    if (U.norm_tag != V.norm_tag) throw GeometryError("norm tag mismatch between clouds");
    double sup = 0.0;
    for (const auto& u : U.points) {
        double inf = std::numeric_limits<double>::infinity();
        for (const auto& v : V.points) inf = std::min(inf, point_dist(u, v));
        sup = std::max(sup, inf);
    }
    return sup;
}

double diameter(const PointCloud& C) {
    C.validate();
    double best = 0.0;
    for (std::size_t i = 0; i < C.points.size(); ++i)
        for (std::size_t j = i + 1; j < C.points.size(); ++j)
            best = std::max(best, point_dist(C.points[i], C.points[j]));
    return best;
}

PointCloud neighborhood_inflate(const PointCloud& A, double r, int directions_per_point) {
    if (!(r > 0.0)) throw GeometryError("neighborhood_inflate requires r > 0");
    A.validate();
    constexpr double eps_inflate = 1e-9;
    const std::size_t d = A.dim();
    PointCloud out = A;
    out.label = A.label.empty() ? "inflated" : A.label + " inflated";
    Rng rng(0x9e3779b9u); // direction sampling is deterministic
    for (const auto& p : A.points) {
        for (int k = 0; k < directions_per_point; ++k) {
            std::vector<double> dir(d, 0.0);
            if (static_cast<std::size_t>(k) < 2 * d) {
                dir[static_cast<std::size_t>(k) / 2] = (k % 2 == 0) ? 1.0 : -1.0;
            } else {
                dir = rng.unit_vector(d);
            }
            std::vector<double> q(p);
            for (std::size_t i = 0; i < d; ++i) q[i] += r * (1.0 - eps_inflate) * dir[i];
            out.points.push_back(std::move(q));
        }
    }
    return out;
}

CoverAttempt ball_measure_greedy(const PointCloud& B, double radius, std::size_t center_cap) {
    if (!(radius > 0.0)) throw GeometryError("ball_measure_greedy requires radius > 0");
    B.validate();
    const std::size_t n = B.size();
    CoverAttempt attempt;
    attempt.cap = center_cap;
    attempt.estimate.radius = radius;
    attempt.estimate.method = CoverEstimate::Method::Greedy;

    std::vector<double> dist_to_centers(n, std::numeric_limits<double>::infinity());
    std::size_t next = 0; // first center: point 0; afterwards the farthest uncovered point
    while (true) {
        attempt.estimate.centers.push_back(B.points[next]);
        if (attempt.estimate.centers.size() > center_cap) {
            attempt.ok = false;
            attempt.centers_used = attempt.estimate.centers.size();
            return attempt;
        }
        double far = -1.0;
        std::size_t far_idx = n;
        for (std::size_t i = 0; i < n; ++i) {
            dist_to_centers[i] = std::min(dist_to_centers[i], point_dist(B.points[i], B.points[next]));
            if (dist_to_centers[i] > radius && dist_to_centers[i] > far) {
                far = dist_to_centers[i];
                far_idx = i;
            }
        }
        if (far_idx == n) break; // covered
        next = far_idx;
    }
    attempt.ok = true;
    attempt.centers_used = attempt.estimate.centers.size();
    // cover validity, checked on every call
    for (const auto& p : B.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : attempt.estimate.centers) best = std::min(best, point_dist(p, c));
        if (!(best <= radius))
            throw GeometryError("greedy cover failed its own validity check");
    }
    return attempt;
}

double ball_measure_upper(const PointCloud& B, double tol, std::size_t center_cap) {
    B.validate();
    if (!(tol > 0.0)) throw GeometryError("ball_measure_upper requires tol > 0");
    if (B.size() <= center_cap) {
        // every point can be its own center
        bool all_equal = true;
        for (const auto& p : B.points)
            if (point_dist(p, B.points.front()) > 0.0) all_equal = false;
        if (B.size() == 1 || all_equal) return 0.0;
    }
    double hi = std::max(diameter(B), tol);
    if (!ball_measure_greedy(B, hi, center_cap).ok) {
        // cap smaller than needed even at the diameter; widen until success
        while (!ball_measure_greedy(B, hi, center_cap).ok) hi *= 2.0;
    }
    double lo = 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (ball_measure_greedy(B, mid, center_cap).ok)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace {

double cover_radius_for_centers(const PointCloud& B, const std::vector<std::size_t>& centers) {
    double worst = 0.0;
    for (const auto& p : B.points) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c : centers) best = std::min(best, point_dist(p, B.points[c]));
        worst = std::max(worst, best);
    }
    return worst;
}

void enumerate_subsets(std::size_t n, std::size_t k, std::vector<std::size_t>& pick,
                       std::size_t start, const PointCloud& B, double& best) {
    if (pick.size() == k) {
        best = std::min(best, cover_radius_for_centers(B, pick));
        return;
    }
    for (std::size_t i = start; i < n; ++i) {
        pick.push_back(i);
        enumerate_subsets(n, k, pick, i + 1, B, best);
        pick.pop_back();
    }
}

} // namespace

double ball_measure_exact(const PointCloud& B, std::size_t k_max) {
    B.validate();
    if (B.size() > 12) throw GeometryError("ball_measure_exact limited to clouds of <= 12 points");
    if (k_max == 0) throw GeometryError("ball_measure_exact requires k_max >= 1");
    const std::size_t n = B.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= std::min(k_max, n); ++k) {
        std::vector<std::size_t> pick;
        enumerate_subsets(n, k, pick, 0, B, best);
        if (best == 0.0) break;
    }
    return best;
}

KappaBounds kappa_bounds(const PointCloud& B, double tol, std::size_t center_cap) {
    const double b = ball_measure_upper(B, tol, center_cap);
    return KappaBounds{0.5 * b, b};
}

} // namespace plab
