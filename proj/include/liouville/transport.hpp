#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "core.hpp"

namespace liouville {

struct CircleAtom {
    double theta = 0, w = 0;
};

struct Atom2 {
    Point2 p;
    double w = 0;
};

// W1 on the circle with geodesic ground distance:
// W1 = min_c int |F - G - c| dtheta, c = weighted median of F - G.
inline double circle_w1(const std::vector<CircleAtom>& a, const std::vector<CircleAtom>& b) {
    struct Ev {
        double th, dm;
    };
    std::vector<Ev> ev;
    ev.reserve(a.size() + b.size());
    for (auto& x : a) ev.push_back({canonical_angle(x.theta), x.w});
    for (auto& x : b) ev.push_back({canonical_angle(x.theta), -x.w});
    std::sort(ev.begin(), ev.end(), [](const Ev& p, const Ev& q) {
        return p.th < q.th || (p.th == q.th && p.dm < q.dm);
    });
    if (ev.empty()) return 0.0;
    // D on the arc (ev[i].th, ev[i+1].th), wrapping to ev[0].th + 2pi
    std::vector<std::pair<double, double>> seg;  // (value, length)
    seg.reserve(ev.size());
    double d = 0.0;
    for (size_t i = 0; i < ev.size(); ++i) {
        d += ev[i].dm;
        double next = (i + 1 < ev.size()) ? ev[i + 1].th : ev[0].th + two_pi;
        double len = next - ev[i].th;
        if (len > 0) seg.push_back({d, len});
    }
    if (seg.empty()) return 0.0;
    auto sorted = seg;
    std::sort(sorted.begin(), sorted.end());
    double half = 0.5 * two_pi, acc = 0.0, c = sorted.back().first;
    for (auto& s : sorted) {
        acc += s.second;
        if (acc >= half) {
            c = s.first;
            break;
        }
    }
    double w = 0.0;
    for (auto& s : seg) w += s.second * std::abs(s.first - c);
    return w;
}

// Exact transport for a dense cost matrix (row-major n x m) and equal total masses.
// Successive shortest paths with Dijkstra on reduced costs.
inline double transport_matrix(const std::vector<double>& cost, std::vector<double> supply,
                               std::vector<double> demand) {
    const size_t n = supply.size(), m = demand.size();
    if (n == 0 || m == 0) return 0.0;
    std::vector<double> flow(n * m, 0.0);
    double total = std::accumulate(supply.begin(), supply.end(), 0.0);
    const double eps = 1e-15 * std::max(1.0, total);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pot(n + m, 0.0), dist_(n + m);
    std::vector<long> prev(n + m);
    std::vector<char> done(n + m);
    double remaining = total;
    int guard = 0;
    while (remaining > eps && guard++ < int(8 * (n + m) + 100)) {
        std::fill(dist_.begin(), dist_.end(), inf);
        std::fill(prev.begin(), prev.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (size_t i = 0; i < n; ++i)
            if (supply[i] > eps) dist_[i] = 0.0;
        long target = -1;
        for (;;) {
            long u = -1;
            double best = inf;
            for (size_t v = 0; v < n + m; ++v)
                if (!done[v] && dist_[v] < best) {
                    best = dist_[v];
                    u = long(v);
                }
            if (u < 0) break;
            done[u] = 1;
            if (size_t(u) >= n && demand[u - n] > eps) {
                target = u;
                break;
            }
            if (size_t(u) < n) {
                for (size_t j = 0; j < m; ++j) {
                    size_t v = n + j;
                    if (done[v]) continue;
                    double rc = cost[u * m + j] + pot[u] - pot[v];
                    if (rc < 0) rc = 0;
                    if (best + rc < dist_[v]) {
                        dist_[v] = best + rc;
                        prev[v] = u;
                    }
                }
            } else {
                size_t j = size_t(u) - n;
                for (size_t i = 0; i < n; ++i) {
                    if (done[i] || flow[i * m + j] <= eps) continue;
                    double rc = -cost[i * m + j] + pot[u] - pot[i];
                    if (rc < 0) rc = 0;
                    if (best + rc < dist_[i]) {
                        dist_[i] = best + rc;
                        prev[i] = u;
                    }
                }
            }
        }
        if (target < 0) break;
        double dt = dist_[target];
        for (size_t v = 0; v < n + m; ++v) pot[v] += done[v] ? dist_[v] : dt;
        // bottleneck
        double amt = demand[target - n];
        long v = target;
        while (prev[v] >= 0) {
            long u = prev[v];
            if (size_t(u) >= n) amt = std::min(amt, flow[size_t(v) * m + (size_t(u) - n)]);
            v = u;
        }
        amt = std::min(amt, supply[v]);
        long start = v;
        v = target;
        while (prev[v] >= 0) {
            long u = prev[v];
            if (size_t(u) < n)
                flow[size_t(u) * m + (size_t(v) - n)] += amt;
            else
                flow[size_t(v) * m + (size_t(u) - n)] -= amt;
            v = u;
        }
        supply[start] -= amt;
        demand[target - n] -= amt;
        remaining -= amt;
    }
    double c = 0.0;
    for (size_t k = 0; k < n * m; ++k)
        if (flow[k] > 0) c += flow[k] * cost[k];
    return c;
}

template <class A, class B, class Cost>
double transport_cost(const std::vector<A>& src, const std::vector<B>& dst, Cost&& c) {
    std::vector<double> cost(src.size() * dst.size()), s(src.size()), d(dst.size());
    for (size_t i = 0; i < src.size(); ++i) {
        s[i] = src[i].w;
        for (size_t j = 0; j < dst.size(); ++j) cost[i * dst.size() + j] = c(src[i], dst[j]);
    }
    for (size_t j = 0; j < dst.size(); ++j) d[j] = dst[j].w;
    return transport_matrix(cost, std::move(s), std::move(d));
}

inline double transport_cost(const std::vector<Atom2>& src, const std::vector<Atom2>& dst) {
    if (src.size() == 1 || dst.size() == 1) {
        const auto& one = src.size() == 1 ? src[0] : dst[0];
        const auto& many = src.size() == 1 ? dst : src;
        double s = 0;
        for (auto& a : many) s += a.w * dist(a.p, one.p);
        return s;
    }
    return transport_cost(src, dst, [](const Atom2& a, const Atom2& b) { return dist(a.p, b.p); });
}

// Merge atoms into an at most g x g bucket grid over [-1,1]^2, keeping cell barycenters.
inline std::vector<Atom2> aggregate_atoms(const std::vector<Atom2>& a, size_t max_atoms = 512) {
    if (a.size() <= max_atoms) return a;
    int g = int(std::floor(std::sqrt(double(max_atoms))));
    std::vector<double> sw(g * g, 0.0), sx(g * g, 0.0), sy(g * g, 0.0);
    for (auto& t : a) {
        int ix = std::clamp(int((t.p.x + 1.0) * 0.5 * g), 0, g - 1);
        int iy = std::clamp(int((t.p.y + 1.0) * 0.5 * g), 0, g - 1);
        int c = iy * g + ix;
        sw[c] += t.w;
        sx[c] += t.w * t.p.x;
        sy[c] += t.w * t.p.y;
    }
    std::vector<Atom2> out;
    for (int c = 0; c < g * g; ++c)
        if (sw[c] > 0) out.push_back({{sx[c] / sw[c], sy[c] / sw[c]}, sw[c]});
    return out;
}

}  // namespace liouville
