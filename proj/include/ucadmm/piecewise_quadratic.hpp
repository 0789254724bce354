#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ucadmm {

/// One quadratic segment q2*p^2 + q1*p + q0 on [lo, hi].
struct QuadPiece {
    double lo = 0.0;
    double hi = 0.0;
    double q2 = 0.0;
    double q1 = 0.0;
    double q0 = 0.0;

    double value(double p) const { return (q2 * p + q1) * p + q0; }
    double derivative(double p) const { return 2.0 * q2 * p + q1; }

    QuadPiece shifted(double delta) const {
        // value(p + delta) expressed in p
        QuadPiece s;
        s.lo = lo - delta;
        s.hi = hi - delta;
        s.q2 = q2;
        s.q1 = 2.0 * q2 * delta + q1;
        s.q0 = (q2 * delta + q1) * delta + q0;
        return s;
    }
};

/// Convex piecewise-quadratic function of one variable on a closed interval.
/// Pieces are contiguous (hi_i == lo_{i+1}); a zero-width piece represents a
/// point mass, which the unit-commitment DP uses for fixed initial output.
class PiecewiseQuadratic {
 public:
    PiecewiseQuadratic() = default;

    static PiecewiseQuadratic single(double lo, double hi, double q2, double q1, double q0) {
        if (hi < lo) throw std::invalid_argument("piecewise quadratic: hi < lo");
        PiecewiseQuadratic f;
        f.pieces_.push_back(QuadPiece{lo, hi, q2, q1, q0});
        return f;
    }

    static PiecewiseQuadratic point(double p, double value) {
        return single(p, p, 0.0, 0.0, value);
    }

    static PiecewiseQuadratic from_pieces(std::vector<QuadPiece> pieces) {
        PiecewiseQuadratic f;
        f.pieces_ = std::move(pieces);
        f.normalize();
        return f;
    }

    bool empty() const { return pieces_.empty(); }
    const std::vector<QuadPiece>& pieces() const { return pieces_; }
    double domain_lo() const { return pieces_.front().lo; }
    double domain_hi() const { return pieces_.back().hi; }

    double value(double p) const {
        if (empty()) throw std::domain_error("value() on empty piecewise quadratic");
        if (p < pieces_.front().lo || p > pieces_.back().hi)
            throw std::domain_error("argument outside the function domain");
        for (const auto& piece : pieces_)
            if (p <= piece.hi) return piece.value(p);
        return pieces_.back().value(p);
    }

    /// Pointwise sum on the intersection of the two domains (union of
    /// breakpoints). Empty result when the domains are disjoint.
    PiecewiseQuadratic add(const PiecewiseQuadratic& other) const {
        if (empty() || other.empty()) return {};
        const double lo = std::max(domain_lo(), other.domain_lo());
        const double hi = std::min(domain_hi(), other.domain_hi());
        if (lo > hi) return {};

        std::vector<double> cuts;
        auto collect = [&](const PiecewiseQuadratic& f) {
            for (const auto& piece : f.pieces_) {
                if (piece.lo >= lo && piece.lo <= hi) cuts.push_back(piece.lo);
                if (piece.hi >= lo && piece.hi <= hi) cuts.push_back(piece.hi);
            }
        };
        cuts.push_back(lo);
        cuts.push_back(hi);
        collect(*this);
        collect(other);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        std::vector<QuadPiece> out;
        if (cuts.size() == 1) {  // single point
            QuadPiece q{cuts[0], cuts[0], 0.0, 0.0, value(cuts[0]) + other.value(cuts[0])};
            out.push_back(q);
        }
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i], b = cuts[i + 1];
            const double mid = 0.5 * (a + b);
            const QuadPiece pa = piece_at(mid);
            const QuadPiece pb = other.piece_at(mid);
            out.push_back(QuadPiece{a, b, pa.q2 + pb.q2, pa.q1 + pb.q1, pa.q0 + pb.q0});
        }
        return from_pieces(std::move(out));
    }

    /// Adds a single quadratic q2*p^2 + q1*p + q0 defined everywhere.
    PiecewiseQuadratic add_quadratic(double q2, double q1, double q0) const {
        PiecewiseQuadratic f = *this;
        for (auto& piece : f.pieces_) {
            piece.q2 += q2;
            piece.q1 += q1;
            piece.q0 += q0;
        }
        return f;
    }

    PiecewiseQuadratic add_constant(double c) const { return add_quadratic(0.0, 0.0, c); }

    /// Restriction to [lo, hi]; empty when there is no overlap.
    PiecewiseQuadratic restrict_to(double lo, double hi) const {
        if (empty() || lo > hi || hi < domain_lo() || lo > domain_hi()) return {};
        std::vector<QuadPiece> out;
        for (const auto& piece : pieces_) {
            const double a = std::max(piece.lo, lo);
            const double b = std::min(piece.hi, hi);
            if (a > b) continue;
            QuadPiece q = piece;
            q.lo = a;
            q.hi = b;
            out.push_back(q);
        }
        return from_pieces(std::move(out));
    }

    /// Leftmost global minimizer and its value.
    std::pair<double, double> argmin() const {
        if (empty()) throw std::domain_error("argmin() on empty piecewise quadratic");
        double best_p = pieces_.front().lo;
        double best_v = pieces_.front().value(best_p);
        for (const auto& piece : pieces_) {
            double p = piece.lo;
            if (piece.q2 > 0.0) {
                const double vertex = -piece.q1 / (2.0 * piece.q2);
                p = std::clamp(vertex, piece.lo, piece.hi);
            } else if (piece.q2 == 0.0 && piece.q1 < 0.0) {
                p = piece.hi;
            }
            const double v = piece.value(p);
            if (v < best_v) {
                best_v = v;
                best_p = p;
            }
        }
        return {best_p, best_v};
    }

    /// Leftmost minimizer over dom ∩ [lo, hi]; nullopt when the window misses
    /// the domain.
    std::optional<std::pair<double, double>> min_restricted(double lo, double hi) const {
        const PiecewiseQuadratic r = restrict_to(lo, hi);
        if (r.empty()) return std::nullopt;
        return r.argmin();
    }

    /// g(p) = min { f(p') : p' in [p - up, p + down] ∩ dom(f) } for convex f.
    /// The result is defined on [dom_lo - down, dom_hi + up] and is convex.
    PiecewiseQuadratic min_over_window(double down, double up) const {
        if (empty()) throw std::domain_error("min_over_window() on empty function");
        if (down < 0.0 || up < 0.0)
            throw std::invalid_argument("min_over_window: window widths must be >= 0");
        if (down == 0.0 && up == 0.0) return *this;

        const auto [m, vmin] = argmin();
        std::vector<QuadPiece> out;
        for (const auto& piece : pieces_) {  // descending part, shifted right by `down`
            if (piece.lo >= m) break;
            QuadPiece q = piece;
            q.hi = std::min(q.hi, m);
            out.push_back(q.shifted(down));
        }
        out.push_back(QuadPiece{m - down, m + up, 0.0, 0.0, vmin});
        for (const auto& piece : pieces_) {  // ascending part, shifted left by `up`
            if (piece.hi <= m) continue;
            QuadPiece q = piece;
            q.lo = std::max(q.lo, m);
            out.push_back(q.shifted(-up));
        }
        return from_pieces(std::move(out));
    }

    /// Continuity at joints and nondecreasing derivative, both with relative
    /// tolerance. Used by tests and debug checks.
    bool is_convex(double rel_tol = 1e-9) const {
        if (empty()) return true;
        for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
            const auto& a = pieces_[i];
            const auto& b = pieces_[i + 1];
            if (a.hi != b.lo) return false;
            const double va = a.value(a.hi), vb = b.value(b.lo);
            const double vscale = std::max({1.0, std::abs(va), std::abs(vb)});
            if (std::abs(va - vb) > rel_tol * vscale) return false;
            const double da = a.derivative(a.hi), db = b.derivative(b.lo);
            const double dscale = std::max({1.0, std::abs(da), std::abs(db)});
            if (db - da < -rel_tol * dscale) return false;
        }
        for (const auto& piece : pieces_) {
            if (piece.q2 < 0.0) return false;
            const double da = piece.derivative(piece.lo), db = piece.derivative(piece.hi);
            const double dscale = std::max({1.0, std::abs(da), std::abs(db)});
            if (db - da < -rel_tol * dscale) return false;
        }
        return true;
    }

    /// max of (this - other) over dom(other), requiring dom(other) ⊆ dom(this).
    /// Used to prune strictly dominated value functions.
    std::optional<double> max_difference_over(const PiecewiseQuadratic& other) const {
        if (empty() || other.empty()) return std::nullopt;
        if (domain_lo() > other.domain_lo() || domain_hi() < other.domain_hi())
            return std::nullopt;
        std::vector<double> cuts;
        for (const auto& piece : pieces_) {
            if (piece.lo >= other.domain_lo() && piece.lo <= other.domain_hi())
                cuts.push_back(piece.lo);
            if (piece.hi >= other.domain_lo() && piece.hi <= other.domain_hi())
                cuts.push_back(piece.hi);
        }
        for (const auto& piece : other.pieces_) {
            cuts.push_back(piece.lo);
            cuts.push_back(piece.hi);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        double mx = -std::numeric_limits<double>::infinity();
        auto consider = [&](double p) {
            mx = std::max(mx, value(p) - other.value(p));
        };
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            consider(cuts[i]);
            if (i + 1 < cuts.size()) {
                const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
                const QuadPiece a = piece_at(mid);
                const QuadPiece b = other.piece_at(mid);
                const double d2 = a.q2 - b.q2, d1 = a.q1 - b.q1;
                if (d2 < 0.0) {  // concave difference, interior max at vertex
                    const double vtx = -d1 / (2.0 * d2);
                    if (vtx > cuts[i] && vtx < cuts[i + 1]) consider(vtx);
                }
            }
        }
        return mx;
    }

 private:
    QuadPiece piece_at(double p) const {
        for (const auto& piece : pieces_)
            if (p <= piece.hi) return piece;
        return pieces_.back();
    }

    void normalize() {
        pieces_.erase(std::remove_if(pieces_.begin(), pieces_.end(),
                                     [](const QuadPiece& q) { return q.hi < q.lo; }),
                      pieces_.end());
        if (pieces_.empty()) return;
        std::stable_sort(pieces_.begin(), pieces_.end(),
                         [](const QuadPiece& a, const QuadPiece& b) {
                             return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
                         });
        std::vector<QuadPiece> out;
        out.reserve(pieces_.size());
        for (const auto& piece : pieces_) {
            if (!out.empty()) {
                QuadPiece& prev = out.back();
                // point pieces covered by an adjacent span carry no information
                if (piece.lo == piece.hi && piece.hi <= prev.hi) continue;
                if (prev.lo == prev.hi && piece.lo <= prev.hi) {
                    prev = piece;
                    continue;
                }
                if (prev.hi == piece.lo && prev.q2 == piece.q2 && prev.q1 == piece.q1 &&
                    prev.q0 == piece.q0) {
                    prev.hi = piece.hi;
                    continue;
                }
            }
            out.push_back(piece);
        }
        pieces_ = std::move(out);
    }

    std::vector<QuadPiece> pieces_;
};

}  // namespace ucadmm
