#pragma once

#include <algorithm>
#include <cassert>
#include <tuple>
#include <vector>

#include "bidask/plfunction.hpp"

namespace bidask {

// Concave functions that are polyhedral on a closed essential domain
// [lo, hi] and -infinity outside it; single-point domains are allowed.
template <class R>
class ConcavePL {
public:
    ConcavePL() : bottom_(true) {}

    static ConcavePL bottom() { return ConcavePL(); }

    // Vertices (xs[i], ys[i]) with xs strictly increasing; the domain is
    // [xs.front(), xs.back()]. Slopes must be non-increasing.
    static ConcavePL from_points(std::vector<R> xs, std::vector<R> ys) {
        if (xs.empty() || xs.size() != ys.size())
            throw std::invalid_argument("ConcavePL: vertex size mismatch");
        for (size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i - 1] < xs[i]))
                throw std::invalid_argument("ConcavePL: abscissae not increasing");
        ConcavePL v;
        v.bottom_ = false;
        v.xs_ = std::move(xs);
        v.ys_ = std::move(ys);
        v.canonicalize();
        assert(v.check_concave());
        return v;
    }

    static ConcavePL interval(R lo, R hi, R value_lo, R value_hi) {
        if (lo == hi) return from_points({std::move(lo)}, {std::move(value_lo)});
        return from_points({std::move(lo), std::move(hi)},
                           {std::move(value_lo), std::move(value_hi)});
    }

    bool is_bottom() const { return bottom_; }
    bool is_finite() const { return !bottom_; }
    const std::vector<R>& vertices_x() const { return xs_; }
    const std::vector<R>& vertices_y() const { return ys_; }
    const R& lo() const { return xs_.front(); }
    const R& hi() const { return xs_.back(); }
    size_t size() const { return xs_.size(); }

    bool in_dom(const R& x) const { return !bottom_ && x >= xs_.front() && x <= xs_.back(); }

    // Value inside the essential domain.
    R operator()(const R& x) const {
        if (!in_dom(x)) throw OutOfDomainError("ConcavePL: evaluation outside domain");
        if (x <= xs_.front()) return ys_.front();
        size_t hi_ix = std::lower_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
        if (xs_[hi_ix] == x) return ys_[hi_ix];
        R t = (ys_[hi_ix] - ys_[hi_ix - 1]) / (xs_[hi_ix] - xs_[hi_ix - 1]);
        return ys_[hi_ix - 1] + t * (x - xs_[hi_ix - 1]);
    }

    // Leftmost maximiser and the maximum value.
    std::pair<R, R> argmax_leftmost() const {
        assert(!bottom_);
        size_t best = 0;
        for (size_t i = 1; i < xs_.size(); ++i)
            if (ys_[i] > ys_[best]) best = i;
        return {xs_[best], ys_[best]};
    }

    friend bool operator==(const ConcavePL& a, const ConcavePL& b) {
        if (a.bottom_ != b.bottom_) return false;
        if (a.bottom_) return true;
        return a.xs_ == b.xs_ && a.ys_ == b.ys_;
    }

private:
    void canonicalize() {
        if (xs_.size() < 3) return;
        std::vector<R> nx{xs_.front()}, ny{ys_.front()};
        for (size_t i = 1; i + 1 < xs_.size(); ++i) {
            R sl = (ys_[i] - ny.back()) / (xs_[i] - nx.back());
            R sr = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
            if (!Arith<R>::close(sl, sr)) {
                nx.push_back(xs_[i]);
                ny.push_back(ys_[i]);
            }
        }
        nx.push_back(xs_.back());
        ny.push_back(ys_.back());
        xs_ = std::move(nx);
        ys_ = std::move(ny);
    }

    bool check_concave() const {
        for (size_t i = 2; i < xs_.size(); ++i) {
            R s0 = (ys_[i - 1] - ys_[i - 2]) / (xs_[i - 1] - xs_[i - 2]);
            R s1 = (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
            if (s1 > s0 && !Arith<R>::close(s0, s1)) return false;
        }
        return true;
    }

    bool bottom_;
    std::vector<R> xs_, ys_;
};

// Convex dual f*(x) = inf_y (f(y) + x*y). Breakpoints and slopes exchange:
// dom f* = [-f'(+inf), -f'(-inf)] and the slope of f* at x = -s is the
// breakpoint of f where slope s is attained.
template <class R>
ConcavePL<R> convex_dual(const ConvexPL<R>& cf) {
    if (cf.is_bottom()) return ConcavePL<R>::bottom();
    const PLFunction<R>& f = cf.fn();
    std::vector<R> sl = f.slopes();
    size_t m = f.size();
    std::vector<R> xs, ys;
    xs.reserve(m + 1);
    ys.reserve(m + 1);
    // walk slopes from the steepest (j = m) down to j = 0 so that x = -s_j
    // increases; pick any point of segment j to evaluate inf(f(y) + x y).
    for (size_t k = 0; k <= m; ++k) {
        size_t j = m - k;
        R x = -sl[j];
        size_t pick = j == 0 ? 0 : j - 1;  // breakpoint adjacent to segment j
        R y = f.values()[pick] + x * f.breakpoints()[pick];
        if (!xs.empty() && !(x > xs.back())) continue;
        xs.push_back(std::move(x));
        ys.push_back(std::move(y));
    }
    return ConcavePL<R>::from_points(std::move(xs), std::move(ys));
}

// Inverse transform f(y) = sup_x (v(x) - x*y); exact involution with
// convex_dual on canonical forms.
template <class R>
ConvexPL<R> dual_inverse(const ConcavePL<R>& v) {
    if (v.is_bottom()) return ConvexPL<R>::bottom();
    const auto& vx = v.vertices_x();
    const auto& vy = v.vertices_y();
    size_t m = vx.size();
    if (m == 1) return ConvexPL<R>::affine(vy[0], -vx[0]);
    // active line i on [y_{i}, y_{i-1}] reading i from m-1 down; transitions
    // happen at y = slope of v's segment i.
    std::vector<R> xs, ys;
    xs.reserve(m - 1);
    ys.reserve(m - 1);
    for (size_t k = 0; k + 1 < m; ++k) {
        size_t i = m - 2 - k;  // segment between vertices i, i+1
        R y = (vy[i + 1] - vy[i]) / (vx[i + 1] - vx[i]);
        if (!xs.empty() && !(y > xs.back())) continue;
        R val = vy[i] - vx[i] * y;
        xs.push_back(std::move(y));
        ys.push_back(std::move(val));
    }
    return ConvexPL<R>(
        PLFunction<R>::from_points(std::move(xs), std::move(ys), -v.hi(), -v.lo()));
}

namespace detail {

template <class R>
struct CapVertex {
    R x, y;
    size_t src;
};

template <class R>
std::vector<CapVertex<R>> gather_vertices(const std::vector<ConcavePL<R>>& vs) {
    std::vector<CapVertex<R>> pts;
    for (size_t i = 0; i < vs.size(); ++i) {
        if (vs[i].is_bottom()) continue;
        for (size_t j = 0; j < vs[i].size(); ++j)
            pts.push_back({vs[i].vertices_x()[j], vs[i].vertices_y()[j], i});
    }
    std::sort(pts.begin(), pts.end(), [](const CapVertex<R>& p, const CapVertex<R>& q) {
        return std::tie(p.x, q.y, p.src) < std::tie(q.x, p.y, q.src);
    });  // by x; at equal x the higher y first, then lower source index
    // keep only the highest point per abscissa
    std::vector<CapVertex<R>> uniq;
    for (auto& p : pts)
        if (uniq.empty() || uniq.back().x != p.x) uniq.push_back(p);
    return uniq;
}

// cross(o, a, b) > 0 iff (a - o, b - o) is a counter-clockwise turn.
template <class R>
R cross(const CapVertex<R>& o, const CapVertex<R>& a, const CapVertex<R>& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Upper hull of the point set; keep_collinear retains vertices lying on hull
// edges (needed to pick nearest supporting vertices in decompositions).
template <class R>
std::vector<CapVertex<R>> upper_hull(std::vector<CapVertex<R>> pts, bool keep_collinear) {
    std::vector<CapVertex<R>> hull;
    for (auto& p : pts) {
        // the chain of an upper hull turns clockwise: cross < 0 keeps the tip
        while (hull.size() >= 2) {
            R c = cross(hull[hull.size() - 2], hull.back(), p);
            if (c < R(0) || (keep_collinear && c == R(0))) break;
            hull.pop_back();
        }
        hull.push_back(p);
    }
    return hull;
}

}  // namespace detail

// Smallest concave function dominating every v_i; Bottom entries are ignored
// and an all-Bottom family yields Bottom.
template <class R>
ConcavePL<R> concave_cap(const std::vector<ConcavePL<R>>& vs) {
    auto pts = detail::gather_vertices(vs);
    if (pts.empty()) return ConcavePL<R>::bottom();
    auto hull = detail::upper_hull(std::move(pts), false);
    std::vector<R> xs, ys;
    xs.reserve(hull.size());
    ys.reserve(hull.size());
    for (auto& p : hull) {
        xs.push_back(std::move(p.x));
        ys.push_back(std::move(p.y));
    }
    return ConcavePL<R>::from_points(std::move(xs), std::move(ys));
}

template <class R>
ConcavePL<R> concave_cap(const ConcavePL<R>& a, const ConcavePL<R>& b) {
    return concave_cap(std::vector<ConcavePL<R>>{a, b});
}

// One atom of a concave-cap decomposition: cap(x) = sum w_k v_{i_k}(x_k)
// with sum w_k = 1 and sum w_k x_k = x.
template <class R>
struct CapAtom {
    size_t index;
    R weight;
    R x;
};

// Decompose cap{vs}(x) into at most two atoms. A single atom is returned
// whenever some v_i touches the cap at x (smallest index wins); otherwise the
// two supporting vertices nearest to x on the hull edge through x are used.
template <class R>
std::vector<CapAtom<R>> cap_decompose(const std::vector<ConcavePL<R>>& vs,
                                      const ConcavePL<R>& cap, const R& x) {
    if (!cap.in_dom(x)) throw OutOfDomainError("cap_decompose: point outside cap domain");
    R cv = cap(x);
    for (size_t i = 0; i < vs.size(); ++i)
        if (vs[i].in_dom(x) && Arith<R>::close(vs[i](x), cv))
            return {CapAtom<R>{i, R(1), x}};
    auto hull = detail::upper_hull(detail::gather_vertices(vs), true);
    const detail::CapVertex<R>* left = nullptr;
    const detail::CapVertex<R>* right = nullptr;
    for (const auto& p : hull) {
        if (!Arith<R>::close(p.y, cap(p.x))) continue;  // below the hull at equal x
        if (p.x < x) left = &p;
        if (p.x > x) {
            right = &p;
            break;
        }
    }
    if (!left || !right)
        throw OutOfDomainError("cap_decompose: no supporting vertices (degenerate input)");
    R w_right = (x - left->x) / (right->x - left->x);
    return {CapAtom<R>{left->src, R(1) - w_right, left->x},
            CapAtom<R>{right->src, w_right, right->x}};
}

// dr_{[b,a]}(v): restrict the essential domain to [b,a]; empty intersection
// gives Bottom.
template <class R>
ConcavePL<R> domain_restrict(const ConcavePL<R>& v, const R& b, const R& a) {
    if (a < b) throw InvalidSpreadError("domain_restrict: ask < bid");
    if (v.is_bottom()) return v;
    R lo = std::max(v.lo(), b);
    R hi = std::min(v.hi(), a);
    if (lo > hi) return ConcavePL<R>::bottom();
    if (lo == hi) return ConcavePL<R>::from_points({lo}, {v(lo)});
    std::vector<R> xs{lo}, ys{v(lo)};
    for (size_t i = 0; i < v.size(); ++i) {
        const R& px = v.vertices_x()[i];
        if (px > lo && px < hi) {
            xs.push_back(px);
            ys.push_back(v.vertices_y()[i]);
        }
    }
    xs.push_back(hi);
    ys.push_back(v(hi));
    return ConcavePL<R>::from_points(std::move(xs), std::move(ys));
}

template <class R>
bool approx_equal(const ConcavePL<R>& u, const ConcavePL<R>& v) {
    if (u.is_bottom() != v.is_bottom()) return false;
    if (u.is_bottom()) return true;
    if (!Arith<R>::close(u.lo(), v.lo()) || !Arith<R>::close(u.hi(), v.hi())) return false;
    for (const R& x : u.vertices_x())
        if (!v.in_dom(x) || !Arith<R>::close(u(x), v(x))) return false;
    for (const R& x : v.vertices_x())
        if (!u.in_dom(x) || !Arith<R>::close(u(x), v(x))) return false;
    return true;
}

}  // namespace bidask
