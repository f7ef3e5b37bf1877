#include "pathheat/pathgrid.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

#include "pathheat/errors.hpp"

namespace pathheat {

Partition Partition::uniform(int n) {
    if (n < 1) throw DomainError("partition needs n >= 1");
    Partition p;
    p.n = n;
    p.eps = 1.0 / n;
    p.times.resize(n + 1);
    for (int i = 0; i <= n; ++i) p.times[i] = static_cast<double>(i) / n;
    return p;
}

int first_violation(const Manifold& m, const DiscretePath& path) {
    for (int i = 1; i <= path.n(); ++i)
        if (!(m.distance(path.nodes[i - 1], path.nodes[i]) < path.delta)) return i;
    return 0;
}

DiscretePath make_path(const Manifold& m, const Point& o, const std::vector<Point>& points,
                       const Partition& partition, double delta) {
    if (static_cast<int>(points.size()) != partition.n)
        throw DomainError("make_path: expected " + std::to_string(partition.n) + " points");
    if (!(delta > 0)) throw DomainError("make_path: delta must be positive");
    if (delta > m.inj_radius()) throw DomainError("make_path: delta exceeds the injectivity radius");
    DiscretePath path;
    path.partition = partition;
    path.delta = delta;
    path.nodes.reserve(points.size() + 1);
    m.check_point(o);
    path.nodes.push_back(o);
    for (const auto& p : points) {
        m.check_point(p);
        path.nodes.push_back(p);
    }
    if (int i = first_violation(m, path))
        throw DeltaViolation("segment " + std::to_string(i) + " is not shorter than delta", i);
    return path;
}

FramePath horizontal_lift(const Manifold& m, const DiscretePath& path, const Frame& u0) {
    FramePath fp;
    fp.frames.reserve(path.nodes.size());
    fp.frames.push_back(u0);
    for (int i = 1; i <= path.n(); ++i) fp.frames.push_back(m.transport(fp.frames.back(), path.nodes[i]));
    return fp;
}

AntiDevelopment anti_development(const Manifold& m, const DiscretePath& path, const FramePath& frames) {
    AntiDevelopment ad;
    ad.increments.reserve(path.n() + 1);
    for (int i = 1; i <= path.n(); ++i)
        ad.increments.push_back(m.frame_coords(frames[i - 1], m.log(path.nodes[i - 1], path.nodes[i])));
    ad.increments.push_back(Vec::Zero(m.dim()));
    return ad;
}

Development develop(const Manifold& m, const Frame& u0, const std::vector<Vec>& increments, double delta) {
    int n = static_cast<int>(increments.size());
    Development out;
    out.path.partition = Partition::uniform(n);
    out.path.delta = delta;
    out.path.nodes.push_back(u0.base);
    out.frames.frames.push_back(u0);
    for (int i = 1; i <= n; ++i) {
        const Vec& db = increments[i - 1];
        if (!(db.norm() < delta))
            throw DeltaViolation("increment " + std::to_string(i) + " is not shorter than delta", i);
        const Frame& u = out.frames.frames.back();
        Point x = m.exp(u.base, u.from_frame(db));
        out.frames.frames.push_back(m.transport(u, x));
        out.path.nodes.push_back(x);
    }
    return out;
}

Development develop(const Manifold& m, const Frame& u0, const AntiDevelopment& b, double delta) {
    return develop(m, u0, std::vector<Vec>(b.increments.begin(), b.increments.end() - 1), delta);
}

double energy(const Manifold& m, const DiscretePath& path) {
    double e = 0;
    for (int i = 1; i <= path.n(); ++i) {
        double r = m.distance(path.nodes[i - 1], path.nodes[i]);
        e += r * r;
    }
    return e / path.partition.eps;
}

double path_distance(const Manifold& m, const DiscretePath& a, const DiscretePath& b) {
    if (!(a.partition == b.partition)) throw DomainError("path_distance: partitions differ");
    double s = 0;
    for (int i = 1; i <= a.n(); ++i) s += m.distance(a.nodes[i], b.nodes[i]);
    return a.partition.eps * s;
}

void write_path_csv(std::ostream& os, const Manifold& m, const DiscretePath& path, std::uint64_t seed,
                    const double* weight) {
    nlohmann::json header = {{"manifold", m.name()}, {"eps", path.partition.eps},
                             {"delta", path.delta}, {"seed", seed}};
    os << "# " << header.dump() << "\n";
    os << "i,s";
    for (int k = 0; k < m.ambient_dim(); ++k) os << ",coord_" << k;
    if (weight) os << ",weight";
    os << "\n" << std::setprecision(17);
    for (int i = 0; i <= path.n(); ++i) {
        os << i << "," << path.partition.s(i);
        for (int k = 0; k < m.ambient_dim(); ++k) os << "," << path.nodes[i][k];
        if (weight) os << "," << *weight;
        os << "\n";
    }
}

}  // namespace pathheat
