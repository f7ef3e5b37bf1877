#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pathheat/geometry.hpp"

namespace pathheat {

// Uniform grid s_i = i/n on [0, 1].
struct Partition {
    int n = 1;
    double eps = 1.0;
    std::vector<double> times;

    static Partition uniform(int n);
    double s(int i) const { return times[i]; }
    bool operator==(const Partition& o) const { return n == o.n; }
};

// Grid points x_0 = o, x_1, ..., x_n of a piecewise geodesic with every
// segment shorter than delta.
struct DiscretePath {
    std::vector<Point> nodes;
    Partition partition;
    double delta = 0;

    int n() const { return partition.n; }
    const Point& origin() const { return nodes[0]; }
    const Point& operator[](int i) const { return nodes[i]; }
};

// Frames u(s_0), ..., u(s_n), each transported from the previous one.
struct FramePath {
    std::vector<Frame> frames;
    const Frame& operator[](int i) const { return frames[i]; }
};

// Increments db_1, ..., db_n and the trailing db_{n+1} = 0.
struct AntiDevelopment {
    std::vector<Vec> increments;
    const Vec& db(int i) const { return increments[i - 1]; }
};

DiscretePath make_path(const Manifold& m, const Point& o, const std::vector<Point>& points,
                       const Partition& partition, double delta);

// Index of the first interval with rho(x_{i-1}, x_i) >= delta, or 0.
int first_violation(const Manifold& m, const DiscretePath& path);

FramePath horizontal_lift(const Manifold& m, const DiscretePath& path, const Frame& u0);

AntiDevelopment anti_development(const Manifold& m, const DiscretePath& path, const FramePath& frames);

struct Development {
    DiscretePath path;
    FramePath frames;
};

// increments holds db_1..db_n.
Development develop(const Manifold& m, const Frame& u0, const std::vector<Vec>& increments,
                    double delta);
Development develop(const Manifold& m, const Frame& u0, const AntiDevelopment& b, double delta);

double energy(const Manifold& m, const DiscretePath& path);

double path_distance(const Manifold& m, const DiscretePath& a, const DiscretePath& b);

// CSV rows (i, s_i, coord_0..coord_D) under a one-line JSON header comment.
void write_path_csv(std::ostream& os, const Manifold& m, const DiscretePath& path,
                    std::uint64_t seed, const double* weight = nullptr);

}  // namespace pathheat
