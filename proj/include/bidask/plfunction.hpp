#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <utility>
#include <vector>

#include "bidask/arith.hpp"
#include "bidask/errors.hpp"

namespace bidask {

// Continuous piecewise linear functions R -> R together with three absorbing
// elements:
//   Bottom         == -infinity everywhere (epigraph = R^2),
//   Top            == +infinity everywhere (empty epigraph),
//   UnboundedBelow == marker for a gradient restriction that diverges to
//                     -infinity; unlike Bottom this signals a mis-specified
//                     model and is rejected by the pricing recursions.
enum class FnKind { Bottom, Finite, Top, UnboundedBelow };

template <class R>
class PLFunction {
public:
    PLFunction() : kind_(FnKind::Bottom) {}

    static PLFunction bottom() { return PLFunction(FnKind::Bottom); }
    static PLFunction top() { return PLFunction(FnKind::Top); }
    static PLFunction unbounded_below() { return PLFunction(FnKind::UnboundedBelow); }

    // f(y) = value_at_zero + slope * y
    static PLFunction affine(R value_at_zero, R slope) {
        PLFunction f(FnKind::Finite);
        f.xs_ = {R(0)};
        f.ys_ = {std::move(value_at_zero)};
        f.left_ = slope;
        f.right_ = std::move(slope);
        return f;
    }

    // Breakpoints must be strictly increasing; ys are the values there.
    static PLFunction from_points(std::vector<R> xs, std::vector<R> ys, R left_slope,
                                  R right_slope) {
        if (xs.empty() || xs.size() != ys.size())
            throw std::invalid_argument("PLFunction: breakpoint/value size mismatch");
        for (size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i - 1] < xs[i]))
                throw std::invalid_argument("PLFunction: breakpoints not increasing");
        PLFunction f(FnKind::Finite);
        f.xs_ = std::move(xs);
        f.ys_ = std::move(ys);
        f.left_ = std::move(left_slope);
        f.right_ = std::move(right_slope);
        f.canonicalize();
        return f;
    }

    FnKind kind() const { return kind_; }
    bool is_finite() const { return kind_ == FnKind::Finite; }
    bool is_bottom() const { return kind_ == FnKind::Bottom; }
    bool is_top() const { return kind_ == FnKind::Top; }
    bool is_unbounded_below() const { return kind_ == FnKind::UnboundedBelow; }

    const std::vector<R>& breakpoints() const { return xs_; }
    const std::vector<R>& values() const { return ys_; }
    const R& left_slope() const { return left_; }
    const R& right_slope() const { return right_; }
    size_t size() const { return xs_.size(); }

    // Slope on segment i, where segment 0 is (-inf, xs[0]] and segment
    // size() is [xs.back(), +inf).
    R segment_slope(size_t i) const {
        assert(is_finite());
        if (i == 0) return left_;
        if (i >= xs_.size()) return right_;
        return (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
    }

    std::vector<R> slopes() const {
        std::vector<R> s;
        s.reserve(xs_.size() + 1);
        for (size_t i = 0; i <= xs_.size(); ++i) s.push_back(segment_slope(i));
        return s;
    }

    // Exact value; callable only on Finite functions.
    R operator()(const R& y) const {
        assert(is_finite());
        if (y <= xs_.front()) return ys_.front() + left_ * (y - xs_.front());
        if (y >= xs_.back()) return ys_.back() + right_ * (y - xs_.back());
        size_t hi = std::upper_bound(xs_.begin(), xs_.end(), y) - xs_.begin();
        const R& x0 = xs_[hi - 1];
        const R& x1 = xs_[hi];
        R t = (ys_[hi] - ys_[hi - 1]) / (x1 - x0);
        return ys_[hi - 1] + t * (y - x0);
    }

    // True iff (cash, shares) lies in the epigraph, i.e. cash >= f(shares).
    // Bottom accepts everything, Top nothing.
    bool epi_contains(const R& cash, const R& shares) const {
        if (is_bottom()) return true;
        if (is_top()) return false;
        if (is_unbounded_below()) throw ModelError("epigraph of unbounded-below function");
        return Arith<R>::geq(cash, (*this)(shares));
    }

    bool is_convex() const {
        if (!is_finite()) return kind_ == FnKind::Bottom;
        for (size_t i = 0; i + 1 <= xs_.size(); ++i) {
            R s0 = segment_slope(i), s1 = segment_slope(i + 1);
            if (s1 < s0 && !Arith<R>::close(s0, s1)) return false;
        }
        return true;
    }

    friend bool operator==(const PLFunction& a, const PLFunction& b) {
        if (a.kind_ != b.kind_) return false;
        if (a.kind_ != FnKind::Finite) return true;
        return a.xs_ == b.xs_ && a.ys_ == b.ys_ && a.left_ == b.left_ && a.right_ == b.right_;
    }

private:
    explicit PLFunction(FnKind k) : kind_(k) {}

    // Merge breakpoints whose adjacent slopes coincide (exactly in rational
    // mode, within relative tolerance in double mode). A function that
    // collapses to an affine one is re-anchored at 0 in exact mode so that
    // canonical forms compare equal.
    void canonicalize() {
        size_t m = xs_.size();
        std::vector<R> sl;
        sl.reserve(m + 1);
        for (size_t i = 0; i <= m; ++i) sl.push_back(segment_slope(i));
        std::vector<R> nx, ny;
        nx.reserve(m);
        ny.reserve(m);
        for (size_t i = 0; i < m; ++i) {
            if (!Arith<R>::close(sl[i], sl[i + 1])) {
                nx.push_back(xs_[i]);
                ny.push_back(ys_[i]);
            }
        }
        if (nx.empty()) {
            if constexpr (Arith<R>::exact) {
                R v0 = ys_.front() - left_ * xs_.front();
                xs_ = {R(0)};
                ys_ = {std::move(v0)};
                right_ = left_;
            } else {
                xs_ = {xs_.front()};
                ys_ = {ys_.front()};
            }
            return;
        }
        xs_ = std::move(nx);
        ys_ = std::move(ny);
    }

    FnKind kind_;
    std::vector<R> xs_, ys_;
    R left_{}, right_{};
};

// Convex member of the family, carrying its certificate. Construction
// validates that slopes are non-decreasing.
template <class R>
class ConvexPL {
public:
    ConvexPL() : f_(PLFunction<R>::bottom()) {}

    explicit ConvexPL(PLFunction<R> f) : f_(std::move(f)) {
        if (f_.is_top() || f_.is_unbounded_below())
            throw ModelError("ConvexPL: top/unbounded element not in the convex family");
        assert(f_.is_convex());
    }

    static ConvexPL bottom() { return ConvexPL(); }
    static ConvexPL affine(R value_at_zero, R slope) {
        return ConvexPL(PLFunction<R>::affine(std::move(value_at_zero), std::move(slope)));
    }

    const PLFunction<R>& fn() const { return f_; }
    bool is_bottom() const { return f_.is_bottom(); }
    bool is_finite() const { return f_.is_finite(); }
    R operator()(const R& y) const { return f_(y); }
    bool epi_contains(const R& cash, const R& shares) const {
        return f_.epi_contains(cash, shares);
    }

    friend bool operator==(const ConvexPL& a, const ConvexPL& b) { return a.f_ == b.f_; }

private:
    PLFunction<R> f_;
};

// h_{[b,a]}(y) = a y^- - b y^+ : the cost, in cash, of the cheapest trade
// moving y shares to zero at bid b / ask a. Sublinear, value 0 at 0.
template <class R>
ConvexPL<R> transaction_kernel(const R& b, const R& a) {
    if (a < b) throw InvalidSpreadError("transaction_kernel: ask < bid");
    return ConvexPL<R>(PLFunction<R>::from_points({R(0)}, {R(0)}, -a, -b));
}

namespace detail {

template <class R>
std::vector<R> merged_grid(const PLFunction<R>& f, const PLFunction<R>& g) {
    std::vector<R> grid;
    grid.reserve(f.size() + g.size());
    std::merge(f.breakpoints().begin(), f.breakpoints().end(), g.breakpoints().begin(),
               g.breakpoints().end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](const R& x, const R& y) { return Arith<R>::close(x, y); }),
               grid.end());
    return grid;
}

// Pointwise max (want_max) or min of two finite functions.
template <class R>
PLFunction<R> combine_extremum(const PLFunction<R>& f, const PLFunction<R>& g, bool want_max) {
    std::vector<R> grid = merged_grid(f, g);
    // Insert crossing points, including on the two unbounded tails.
    std::vector<R> pts;
    pts.reserve(2 * grid.size() + 2);
    auto cross = [&](const R& x0, const R& fv, const R& gv, const R& fs, const R& gs)
        -> std::optional<R> {
        if (Arith<R>::close(fs, gs)) return std::nullopt;
        return x0 + (gv - fv) / (fs - gs);
    };
    {  // left tail
        const R& x0 = grid.front();
        auto xc = cross(x0, f(x0), g(x0), f.left_slope(), g.left_slope());
        if (xc && *xc < x0 && !Arith<R>::close(*xc, x0)) pts.push_back(*xc);
    }
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        pts.push_back(grid[i]);
        const R& x0 = grid[i];
        const R& x1 = grid[i + 1];
        R fs = (f(x1) - f(x0)) / (x1 - x0);
        R gs = (g(x1) - g(x0)) / (x1 - x0);
        auto xc = cross(x0, f(x0), g(x0), fs, gs);
        if (xc && *xc > x0 && *xc < x1 && !Arith<R>::close(*xc, x0) && !Arith<R>::close(*xc, x1))
            pts.push_back(*xc);
    }
    pts.push_back(grid.back());
    {  // right tail
        const R& x0 = grid.back();
        auto xc = cross(x0, f(x0), g(x0), f.right_slope(), g.right_slope());
        if (xc && *xc > x0 && !Arith<R>::close(*xc, x0)) pts.push_back(*xc);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const R& x, const R& y) { return Arith<R>::close(x, y); }),
              pts.end());
    std::vector<R> ys;
    ys.reserve(pts.size());
    for (const R& x : pts) {
        R fv = f(x), gv = g(x);
        ys.push_back(want_max ? std::max(fv, gv) : std::min(fv, gv));
    }
    R sl = want_max ? std::min(f.left_slope(), g.left_slope())
                    : std::max(f.left_slope(), g.left_slope());
    R sr = want_max ? std::max(f.right_slope(), g.right_slope())
                    : std::min(f.right_slope(), g.right_slope());
    return PLFunction<R>::from_points(std::move(pts), std::move(ys), std::move(sl),
                                      std::move(sr));
}

}  // namespace detail

template <class R>
PLFunction<R> pl_max(const PLFunction<R>& f, const PLFunction<R>& g) {
    if (f.is_unbounded_below() || g.is_unbounded_below())
        throw ModelError("pl_max on unbounded-below function");
    if (f.is_top() || g.is_top()) return PLFunction<R>::top();
    if (f.is_bottom()) return g;
    if (g.is_bottom()) return f;
    return detail::combine_extremum(f, g, true);
}

template <class R>
PLFunction<R> pl_min(const PLFunction<R>& f, const PLFunction<R>& g) {
    if (f.is_unbounded_below() || g.is_unbounded_below())
        throw ModelError("pl_min on unbounded-below function");
    if (f.is_bottom() || g.is_bottom()) return PLFunction<R>::bottom();
    if (f.is_top()) return g;
    if (g.is_top()) return f;
    return detail::combine_extremum(f, g, false);
}

// Max of convex functions as the upper envelope of their supporting lines;
// keeps the slope sequence monotone by construction, which matters in double
// mode where crossing-based maxima can pick up slope noise.
template <class R>
ConvexPL<R> pl_max(const ConvexPL<R>& f, const ConvexPL<R>& g) {
    if (f.is_bottom()) return g;
    if (g.is_bottom()) return f;
    struct Line {
        R s, c;  // y = s*x + c
    };
    std::vector<Line> lines;
    auto add_lines = [&lines](const PLFunction<R>& h) {
        const auto& xs = h.breakpoints();
        const auto& ys = h.values();
        for (size_t j = 0; j <= xs.size(); ++j) {
            size_t anchor = j == 0 ? 0 : j - 1;
            R s = h.segment_slope(j);
            lines.push_back({s, ys[anchor] - s * xs[anchor]});
        }
    };
    add_lines(f.fn());
    add_lines(g.fn());
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return a.s < b.s || (a.s == b.s && a.c > b.c);
    });
    // near-parallel lines meet far outside the working range and poison the
    // breakpoint arithmetic; keep the highest-intercept line of each slope group
    {
        std::vector<Line> grouped;
        for (const Line& L : lines) {
            if (!grouped.empty() && Arith<R>::close(grouped.back().s, L.s)) {
                if (L.c > grouped.back().c) grouped.back() = L;
            } else {
                grouped.push_back(L);
            }
        }
        lines = std::move(grouped);
    }
    std::vector<Line> env;
    for (const Line& L : lines) {
        if (!env.empty() && env.back().s == L.s) continue;
        while (env.size() >= 2) {
            const Line& T = env[env.size() - 2];
            const Line& U = env.back();
            // U is redundant iff L meets T no later than U does
            if ((T.c - L.c) * (U.s - T.s) <= (T.c - U.c) * (L.s - T.s))
                env.pop_back();
            else
                break;
        }
        env.push_back(L);
    }
    if (env.size() == 1) return ConvexPL<R>(PLFunction<R>::affine(env[0].c, env[0].s));
    std::vector<R> xs, ys;
    xs.reserve(env.size() - 1);
    ys.reserve(env.size() - 1);
    for (size_t i = 0; i + 1 < env.size(); ++i) {
        R x = (env[i].c - env[i + 1].c) / (env[i + 1].s - env[i].s);
        // skip breakpoints collapsing onto the previous one (nearly concurrent
        // lines); the sliver segment's chord would be numerically meaningless
        if (!xs.empty() && (!(x > xs.back()) || Arith<R>::close(x, xs.back()))) continue;
        ys.push_back(env[i].s * x + env[i].c);
        xs.push_back(std::move(x));
    }
    if (xs.empty()) return ConvexPL<R>(PLFunction<R>::affine(env[0].c, env[0].s));
    return ConvexPL<R>(PLFunction<R>::from_points(std::move(xs), std::move(ys), env.front().s,
                                                  env.back().s));
}

template <class R>
PLFunction<R> pl_add(const PLFunction<R>& f, const PLFunction<R>& g) {
    assert(f.is_finite() && g.is_finite());
    std::vector<R> grid = detail::merged_grid(f, g);
    std::vector<R> ys;
    ys.reserve(grid.size());
    for (const R& x : grid) ys.push_back(f(x) + g(x));
    return PLFunction<R>::from_points(std::move(grid), std::move(ys),
                                      f.left_slope() + g.left_slope(),
                                      f.right_slope() + g.right_slope());
}

// g(y) = f(y) + c*y
template <class R>
PLFunction<R> add_linear(const PLFunction<R>& f, const R& c) {
    assert(f.is_finite());
    std::vector<R> xs = f.breakpoints(), ys = f.values();
    for (size_t i = 0; i < xs.size(); ++i) ys[i] += c * xs[i];
    return PLFunction<R>::from_points(std::move(xs), std::move(ys), f.left_slope() + c,
                                      f.right_slope() + c);
}

template <class R>
PLFunction<R> negate(const PLFunction<R>& f) {
    assert(f.is_finite());
    std::vector<R> ys = f.values();
    for (R& y : ys) y = -y;
    return PLFunction<R>::from_points(f.breakpoints(), std::move(ys), -f.left_slope(),
                                      -f.right_slope());
}

// g(x) = f(x + c)
template <class R>
PLFunction<R> shift_arg(const PLFunction<R>& f, const R& c) {
    assert(f.is_finite());
    std::vector<R> xs = f.breakpoints();
    for (R& x : xs) x -= c;
    return PLFunction<R>::from_points(std::move(xs), f.values(), f.left_slope(),
                                      f.right_slope());
}

// g(x) = f(-x)
template <class R>
PLFunction<R> reflect(const PLFunction<R>& f) {
    assert(f.is_finite());
    std::vector<R> xs(f.size()), ys(f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        xs[i] = -f.breakpoints()[f.size() - 1 - i];
        ys[i] = f.values()[f.size() - 1 - i];
    }
    return PLFunction<R>::from_points(std::move(xs), std::move(ys), -f.right_slope(),
                                      -f.left_slope());
}

namespace detail {

// m(y) = min_{x <= y} f(x); requires left tail slope <= 0 so the result is
// finite. The output is flat wherever the running minimum binds.
template <class R>
PLFunction<R> running_min_left(const PLFunction<R>& f) {
    assert(f.is_finite() && f.left_slope() <= R(0));
    const auto& xs = f.breakpoints();
    const auto& ys = f.values();
    std::vector<R> ox, oy;
    ox.reserve(xs.size() + 2);
    oy.reserve(xs.size() + 2);
    ox.push_back(xs[0]);
    oy.push_back(ys[0]);
    R M = ys[0];
    for (size_t i = 1; i < xs.size(); ++i) {
        if (ys[i] < M) {
            if (ys[i - 1] > M) {
                // flat at M, then descend along f from the crossing point
                R seg = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
                R xc = xs[i - 1] + (M - ys[i - 1]) / seg;
                if (xc > ox.back() && !Arith<R>::close(xc, ox.back())) {
                    ox.push_back(xc);
                    oy.push_back(M);
                }
            }
            ox.push_back(xs[i]);
            oy.push_back(ys[i]);
            M = ys[i];
        } else {
            ox.push_back(xs[i]);
            oy.push_back(M);
        }
    }
    R right;
    if (f.right_slope() < R(0)) {
        if (ys.back() > M) {
            R xc = xs.back() + (M - ys.back()) / f.right_slope();
            if (xc > ox.back() && !Arith<R>::close(xc, ox.back())) {
                ox.push_back(xc);
                oy.push_back(M);
            }
        }
        right = f.right_slope();
    } else {
        right = R(0);
    }
    return PLFunction<R>::from_points(std::move(ox), std::move(oy), f.left_slope(),
                                      std::move(right));
}

}  // namespace detail

// Gradient restriction gr_{[b,a]}(f): the function whose epigraph is
// epi h_{[b,a]} + epi f, computed as the infimal convolution of h with f.
// Valid for non-convex f. Returns UnboundedBelow when the convolution
// diverges (empty dual-domain intersection for convex f).
template <class R>
PLFunction<R> gradient_restrict(const PLFunction<R>& f, const R& b, const R& a) {
    if (a < b) throw InvalidSpreadError("gradient_restrict: ask < bid");
    if (!f.is_finite()) return f;
    if (f.left_slope() + b > R(0)) return PLFunction<R>::unbounded_below();
    if (f.right_slope() + a < R(0)) return PLFunction<R>::unbounded_below();
    // Split h(y-x) by the sign of y-x:
    //   x <= y branch:  -b*y + min_{x<=y}(f(x) + b*x)
    //   x >= y branch:  -a*y + min_{x>=y}(f(x) + a*x)
    PLFunction<R> gb = detail::running_min_left(add_linear(f, b));
    PLFunction<R> r1 = add_linear(gb, R(-b));
    PLFunction<R> ga = reflect(detail::running_min_left(reflect(add_linear(f, a))));
    PLFunction<R> r2 = add_linear(ga, R(-a));
    return pl_min(r1, r2);
}

// Convex fast path: clamp the slope sequence into [-a, -b] around the
// contact region. Returns a plain PLFunction so the UnboundedBelow marker can
// be reported; cross-checked against the infimal convolution in tests.
template <class R>
PLFunction<R> gradient_restrict_convex(const ConvexPL<R>& cf, const R& b, const R& a) {
    if (a < b) throw InvalidSpreadError("gradient_restrict: ask < bid");
    if (cf.is_bottom()) return PLFunction<R>::bottom();
    const PLFunction<R>& f = cf.fn();
    std::vector<R> sl = f.slopes();
    size_t m = f.size();
    if (sl.front() + b > R(0) || sl.back() + a < R(0))
        return PLFunction<R>::unbounded_below();
    size_t jlo = 0;
    while (sl[jlo] < -a) ++jlo;
    if (sl[jlo] > -b) {
        // slopes jump across the band: single contact point at breakpoint jlo-1
        const R& x = f.breakpoints()[jlo - 1];
        return PLFunction<R>::from_points({x}, {f(x)}, -a, -b);
    }
    size_t jhi = m;
    while (sl[jhi] > -b) --jhi;
    std::vector<R> nx, ny;
    size_t lo = jlo == 0 ? 0 : jlo - 1;
    size_t hi = std::min(jhi, m - 1);
    for (size_t i = lo; i <= hi; ++i) {
        nx.push_back(f.breakpoints()[i]);
        ny.push_back(f.values()[i]);
    }
    R left = jlo == 0 ? sl.front() : -a;
    R right = jhi == m ? sl.back() : -b;
    return PLFunction<R>::from_points(std::move(nx), std::move(ny), std::move(left),
                                      std::move(right));
}

// Closed intervals on which f >= 0, left to right; single points allowed.
// lo/hi are meaningful only when the matching _inf flag is false.
template <class R>
struct SignInterval {
    bool lo_inf = false, hi_inf = false;
    R lo{}, hi{};
    bool contains(const R& x) const {
        return (lo_inf || x >= lo) && (hi_inf || x <= hi);
    }
};

template <class R>
std::vector<SignInterval<R>> nonneg_set(const PLFunction<R>& f) {
    if (f.is_bottom()) return {};
    if (f.is_top()) {
        SignInterval<R> all;
        all.lo_inf = all.hi_inf = true;
        return {all};
    }
    if (f.is_unbounded_below()) throw ModelError("nonneg_set of unbounded-below function");
    // insert roots so every cell has a constant sign
    std::vector<R> xs(f.breakpoints()), ys(f.values());
    auto insert_root = [&](size_t pos, const R& x) {
        xs.insert(xs.begin() + pos, x);
        ys.insert(ys.begin() + pos, R(0));
    };
    if (f.left_slope() != R(0)) {
        R xc = xs.front() - ys.front() / f.left_slope();
        if (xc < xs.front()) insert_root(0, xc);
    }
    for (size_t i = 1; i < xs.size(); ++i) {
        if ((ys[i - 1] < R(0) && ys[i] > R(0)) || (ys[i - 1] > R(0) && ys[i] < R(0))) {
            R seg = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            insert_root(i, xs[i - 1] - ys[i - 1] / seg);
            ++i;
        }
    }
    if (f.right_slope() != R(0)) {
        R xc = xs.back() - ys.back() / f.right_slope();
        if (xc > xs.back()) insert_root(xs.size(), xc);
    }
    size_t n = xs.size();
    // cell c = 0..n: c=0 left tail, c=n right tail, else [xs[c-1], xs[c]]
    auto cell_ok = [&](size_t c) {
        if (c == 0) return ys.front() >= R(0) && f.left_slope() <= R(0);
        if (c == n) return ys.back() >= R(0) && f.right_slope() >= R(0);
        return ys[c - 1] >= R(0) && ys[c] >= R(0);
    };
    std::vector<SignInterval<R>> out;
    size_t c = 0;
    while (c <= n) {
        if (!cell_ok(c)) {
            // isolated touch point at the right end of this cell
            if (c < n && ys[c] == R(0) && !cell_ok(c + 1)) {
                SignInterval<R> pt;
                pt.lo = pt.hi = xs[c];
                out.push_back(pt);
            }
            ++c;
            continue;
        }
        SignInterval<R> iv;
        if (c == 0)
            iv.lo_inf = true;
        else
            iv.lo = xs[c - 1];
        while (c <= n && cell_ok(c)) ++c;
        if (c > n)
            iv.hi_inf = true;
        else
            iv.hi = xs[c - 1];
        out.push_back(iv);
    }
    return out;
}

// Over {x : D(x) >= 0}, pick the x minimising |x - center|, breaking ties by
// |x|. Returns nothing when the set is empty.
template <class R>
std::optional<R> closest_feasible(const PLFunction<R>& D, const R& center) {
    auto ivs = nonneg_set(D);
    std::optional<R> best;
    std::optional<std::pair<R, R>> best_key;
    for (const auto& iv : ivs) {
        R cand;
        if (iv.contains(center))
            cand = center;
        else if (!iv.lo_inf && center < iv.lo)
            cand = iv.lo;
        else
            cand = iv.hi;
        std::pair<R, R> key{cand >= center ? cand - center : center - cand,
                            cand >= R(0) ? cand : -cand};
        if (!best_key || key < *best_key) {
            best_key = key;
            best = cand;
        }
    }
    return best;
}

template <class R>
bool approx_equal(const PLFunction<R>& f, const PLFunction<R>& g) {
    if (f.kind() != g.kind()) return false;
    if (!f.is_finite()) return true;
    if (!Arith<R>::close(f.left_slope(), g.left_slope())) return false;
    if (!Arith<R>::close(f.right_slope(), g.right_slope())) return false;
    for (const R& x : detail::merged_grid(f, g))
        if (!Arith<R>::close(f(x), g(x))) return false;
    return true;
}

}  // namespace bidask
