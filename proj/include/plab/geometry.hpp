#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace plab {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite set of states in a normed phase space; the universal stand-in for
// the bounded sets handled by the attractor machinery. The norm is Euclidean
// on the stored coordinates.
struct PointCloud {
    std::vector<std::vector<double>> points;
    std::string norm_tag = "euclidean";
    std::string label;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const;
    void validate() const; // nonempty, equal dims, finite coordinates

    void save_csv(const std::string& csv_path, const std::string& meta_path) const;
    static PointCloud load_csv(const std::string& csv_path, const std::string& meta_path);
};

double point_dist(const std::vector<double>& a, const std::vector<double>& b);
double point_norm(const std::vector<double>& a);

// d_H(U, V) = sup_{u in U} inf_{v in V} d(u, v); asymmetric
double hausdorff_semidist(const PointCloud& U, const PointCloud& V);

double diameter(const PointCloud& C);

// Augments the cloud with points on spheres of radius r (1 - eps_inflate)
// around each original point; eps keeps them strictly inside the open ball.
PointCloud neighborhood_inflate(const PointCloud& A, double r, int directions_per_point);

struct CoverEstimate {
    double radius = 0.0;
    std::vector<std::vector<double>> centers;
    enum class Method { Greedy, ExactBruteForce } method = Method::Greedy;
};

struct CoverAttempt {
    bool ok = false;
    CoverEstimate estimate;
    std::size_t centers_used = 0;
    std::size_t cap = 0;
};

inline constexpr std::size_t kGreedyCenterCap = 4096;

// Farthest-point greedy cover with centers restricted to cloud points;
// fails (reported, not thrown) once more than `center_cap` centers are needed.
CoverAttempt ball_measure_greedy(const PointCloud& B, double radius,
                                 std::size_t center_cap = kGreedyCenterCap);

// Least radius (within tol, by bisection) at which the greedy cover succeeds
// with at most `center_cap` centers.
double ball_measure_upper(const PointCloud& B, double tol,
                          std::size_t center_cap = kGreedyCenterCap);

// Minimal radius so that some subset of at most k_max cloud points covers the
// cloud; exhaustive, requires |B| <= 12.
double ball_measure_exact(const PointCloud& B, std::size_t k_max);

struct KappaBounds {
    double lower = 0.0;
    double upper = 0.0; // == 2 * lower
};

// Computable bracket for the Kuratowski measure derived from the greedy cover
// radius b: since b is within a factor two of the best cloud-centered cover,
// [b/2, b] always contains the exact restricted cover radius.
KappaBounds kappa_bounds(const PointCloud& B, double tol, std::size_t center_cap = 8);

} // namespace plab
