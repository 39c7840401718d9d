// odtmotion: rigid-motion estimation for optical diffraction tomography
// Smooth interpolation of frame data: 1D cubic splines on uniform grids
// (not-a-knot and periodic closures) and the tensor-product bicubic spline
// on the signed-polar grid, evaluated per cell from Hermite corner data.
#pragma once

#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/grid.hpp>
#include <odt/types.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace odt {

namespace detail {

/// Solve a tridiagonal system lower[i]*x[i-1] + diag[i]*x[i] +
/// upper[i]*x[i+1] = rhs[i] by the Thomas algorithm.  lower[0] and
/// upper[n-1] are ignored.  Returns the solution; inputs are by value
/// because the sweep overwrites them.
inline std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                             std::vector<double> diag,
                                             std::vector<double> upper,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    }
    return x;
}

/// Solve the cyclic system x[i-1] + 4*x[i] + x[i+1] = rhs[i] (indices
/// mod n, n >= 3) via the Sherman-Morrison correction of a plain
/// tridiagonal solve.
inline std::vector<double> solve_cyclic_141(const std::vector<double> &rhs) {
    const std::size_t n = rhs.size();
    const double gamma = -4.0;
    std::vector<double> lower(n, 1.0), upper(n, 1.0), diag(n, 4.0);
    diag[0] = 4.0 - gamma;
    diag[n - 1] = 4.0 - 1.0 / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = 1.0;
    const std::vector<double> y = solve_tridiagonal(lower, diag, upper, rhs);
    const std::vector<double> z = solve_tridiagonal(lower, diag, upper, u);
    // v = (1, 0, ..., 0, 1/gamma)
    const double vy = y[0] + y[n - 1] / gamma;
    const double vz = z[0] + z[n - 1] / gamma;
    const double factor = vy / (1.0 + vz);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = y[i] - factor * z[i];
    }
    return x;
}

} // namespace detail

// =============================================================================
// 1D cubic spline on a uniform grid
// =============================================================================

/// Closure condition for a cubic spline.
enum class SplineBC {
    NotAKnot, ///< third derivative continuous across the 2nd and (m-1)th knot
    Periodic  ///< y, y', y'' periodic with period m*h (y[m] == y[0] implied)
};

/// Interpolating cubic spline through (x0 + i*h, y[i]), i = 0..m-1.
///
/// Stored via the second derivatives M[i] at the knots.  On the interval
/// [x_i, x_{i+1}], with A = (x_{i+1}-x)/h and B = (x-x_i)/h:
///   S(x) = A*y_i + B*y_{i+1} + (h^2/6) * ((A^3-A)*M_i + (B^3-B)*M_{i+1}).
class CubicSpline1D {
  public:
    /// @param x0  first knot position
    /// @param h   knot spacing (> 0)
    /// @param y   knot values (NotAKnot: size >= 4; Periodic: size >= 3,
    ///            value at x0 + m*h identified with y[0])
    /// @param bc  closure condition
    CubicSpline1D(double x0, double h, std::vector<double> y, SplineBC bc)
        : x0_(x0), h_(h), y_(std::move(y)), bc_(bc) {
        const int m = static_cast<int>(y_.size());
        if (!(h_ > 0.0) || (bc == SplineBC::NotAKnot && m < 4) ||
            (bc == SplineBC::Periodic && m < 3)) {
            throw ConfigError("CubicSpline1D: invalid spacing or too few knots");
        }
        M_.assign(m, 0.0);
        const double scale = 6.0 / (h_ * h_);
        if (bc == SplineBC::Periodic) {
            std::vector<double> d(m);
            for (int i = 0; i < m; ++i) {
                const double yl = y_[(i + m - 1) % m];
                const double yr = y_[(i + 1) % m];
                d[i] = scale * (yr - 2.0 * y_[i] + yl);
            }
            M_ = detail::solve_cyclic_141(d);
        } else {
            // Uniform-grid not-a-knot in second-derivative form.  Continuity
            // of S''' across the 2nd knot reads M0 = 2*M1 - M2; inserting it
            // into the first interior equation yields 6*M1 = d1 directly, and
            // symmetrically at the right end.
            std::vector<double> d(m);
            for (int i = 1; i + 1 < m; ++i) {
                d[i] = scale * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]);
            }
            M_[1] = d[1] / 6.0;
            M_[m - 2] = d[m - 2] / 6.0;
            const int interior = m - 4; // unknowns M2 .. M_{m-3}
            if (interior > 0) {
                std::vector<double> lower(interior, 1.0), upper(interior, 1.0),
                    diag(interior, 4.0), rhs(interior);
                for (int i = 0; i < interior; ++i) {
                    rhs[i] = d[i + 2];
                }
                rhs.front() -= M_[1];
                rhs.back() -= M_[m - 2];
                const std::vector<double> sol =
                    detail::solve_tridiagonal(lower, diag, upper, rhs);
                for (int i = 0; i < interior; ++i) {
                    M_[i + 2] = sol[i];
                }
            }
            M_[0] = 2.0 * M_[1] - M_[2];
            M_[m - 1] = 2.0 * M_[m - 2] - M_[m - 3];
        }
    }

    /// Spline value at x.  Periodic splines wrap x; not-a-knot splines
    /// extend the boundary cubics outside [x0, x0 + (m-1)*h].
    double operator()(double x) const {
        const auto [i, ip, u] = locate(x);
        const double A = 1.0 - u, B = u;
        return A * y_[i] + B * y_[ip] +
               (h_ * h_ / 6.0) *
                   ((A * A * A - A) * M_[i] + (B * B * B - B) * M_[ip]);
    }

    /// Spline derivative at x.
    double derivative(double x) const {
        const auto [i, ip, u] = locate(x);
        const double A = 1.0 - u, B = u;
        return (y_[ip] - y_[i]) / h_ +
               (h_ / 6.0) *
                   ((3.0 * B * B - 1.0) * M_[ip] - (3.0 * A * A - 1.0) * M_[i]);
    }

    /// First derivatives of the spline at all knots.
    std::vector<double> node_derivatives() const {
        const int m = static_cast<int>(y_.size());
        std::vector<double> s(m);
        const int last = bc_ == SplineBC::Periodic ? m : m - 1;
        for (int i = 0; i < last; ++i) {
            const int ip = (i + 1) % m;
            s[i] = (y_[ip] - y_[i]) / h_ - h_ * (2.0 * M_[i] + M_[ip]) / 6.0;
        }
        if (bc_ != SplineBC::Periodic) {
            s[m - 1] = (y_[m - 1] - y_[m - 2]) / h_ +
                       h_ * (2.0 * M_[m - 1] + M_[m - 2]) / 6.0;
        }
        return s;
    }

    const std::vector<double> &second_derivatives() const { return M_; }

  private:
    struct Cell {
        int i;
        int ip;
        double u;
    };

    Cell locate(double x) const {
        const int m = static_cast<int>(y_.size());
        if (bc_ == SplineBC::Periodic) {
            const double period = m * h_;
            double t = std::fmod(x - x0_, period);
            if (t < 0.0) {
                t += period;
            }
            int i = std::clamp(static_cast<int>(t / h_), 0, m - 1);
            return {i, (i + 1) % m, t / h_ - i};
        }
        const double t = (x - x0_) / h_;
        const int i = std::clamp(static_cast<int>(std::floor(t)), 0, m - 2);
        return {i, i + 1, t - i};
    }

    double x0_;
    double h_;
    std::vector<double> y_;
    SplineBC bc_;
    std::vector<double> M_;
};

// =============================================================================
// Bicubic spline interpolation on the signed-polar grid
// =============================================================================

/// C^2 interpolant of a real field sampled on a PolarGrid.
///
/// The 2n x 2n samples are first extended to the full angular period via the
/// chart identification (r, phi + pi) == (-r, phi), giving a 2n x 4n table
/// over radii in [-r_max, r_max] and angles in [0, 2*pi).  The interpolant
/// is the tensor-product cubic spline of that table — not-a-knot along the
/// radius, periodic along the angle — represented by Hermite corner data
/// (value, d/dr, d/dphi, d2/drdphi at every extended node) so each query
/// costs a single bicubic cell evaluation.  By uniqueness of bicubic Hermite
/// data the cellwise evaluation reproduces the tensor spline exactly, and
/// the construction is symmetric under the chart identification, so
/// evaluating at (r, phi) and (-r, phi + pi) agrees to rounding.
///
/// Queries outside the covered disk return std::nullopt: the cover radius is
/// min(0.995 * k0, grid max radius), guarding both the evanescent rim and
/// radial extrapolation.
class PolarInterpolator {
  public:
    PolarInterpolator(const PolarGrid &grid, const std::vector<double> &values)
        : grid_(grid) {
        m_ = grid_.size();
        na_ = 2 * m_;
        if (static_cast<int>(values.size()) != m_ * m_) {
            throw ConfigError("PolarInterpolator: values size != (2n)^2");
        }
        r0_ = grid_.radii.front();
        hr_ = grid_.radial_step();
        hphi_ = grid_.angular_step();
        cover_ = std::min(0.995 * grid_.k0, grid_.max_radius());

        // Extend the chart to the full angular period.
        val_.resize(static_cast<std::size_t>(m_) * na_);
        for (int i = 0; i < m_; ++i) {
            const int flip = grid_.flip_radius(i);
            for (int j = 0; j < m_; ++j) {
                val_[idx(i, j)] = values[static_cast<std::size_t>(i) * m_ + j];
                val_[idx(i, j + m_)] =
                    values[static_cast<std::size_t>(flip) * m_ + j];
            }
        }

        // Radial derivatives: one not-a-knot spline per extended column.
        dr_.resize(val_.size());
        std::vector<double> col(m_);
        for (int j = 0; j < na_; ++j) {
            for (int i = 0; i < m_; ++i) {
                col[i] = val_[idx(i, j)];
            }
            const CubicSpline1D s(r0_, hr_, col, SplineBC::NotAKnot);
            const std::vector<double> nd = s.node_derivatives();
            for (int i = 0; i < m_; ++i) {
                dr_[idx(i, j)] = nd[i];
            }
        }

        // Angular and mixed derivatives: periodic splines along each row,
        // of the values and of the radial-derivative table respectively.
        dphi_.resize(val_.size());
        drphi_.resize(val_.size());
        std::vector<double> row(na_);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < na_; ++j) {
                row[j] = val_[idx(i, j)];
            }
            const CubicSpline1D sv(0.0, hphi_, row, SplineBC::Periodic);
            const std::vector<double> ndv = sv.node_derivatives();
            for (int j = 0; j < na_; ++j) {
                dphi_[idx(i, j)] = ndv[j];
            }
            for (int j = 0; j < na_; ++j) {
                row[j] = dr_[idx(i, j)];
            }
            const CubicSpline1D sd(0.0, hphi_, row, SplineBC::Periodic);
            const std::vector<double> ndd = sd.node_derivatives();
            for (int j = 0; j < na_; ++j) {
                drphi_[idx(i, j)] = ndd[j];
            }
        }
    }

    /// Convenience constructor from a squared-energy frame.
    explicit PolarInterpolator(const NuFrame &frame)
        : PolarInterpolator(frame.grid, frame.values) {}

    const PolarGrid &grid() const { return grid_; }

    /// Largest query radius served: min(0.995 * k0, grid max radius).
    double cover_radius() const { return cover_; }

    /// Interpolated value at a Cartesian frequency, or nullopt outside the
    /// covered disk.
    std::optional<double> at(const Vec2 &k) const {
        return at_polar(k.norm(), std::atan2(k.y(), k.x()));
    }

    /// Interpolated value in signed-polar coordinates (any real phi).
    std::optional<double> at_polar(double r, double phi) const {
        if (!(std::abs(r) <= cover_)) {
            return std::nullopt;
        }
        const CellLoc c = locate(r, phi);
        const double hu00 = hermite00(c.u), hu01 = hermite01(c.u);
        const double hu10 = hr_ * hermite10(c.u), hu11 = hr_ * hermite11(c.u);
        const double hv00 = hermite00(c.v), hv01 = hermite01(c.v);
        const double hv10 = hphi_ * hermite10(c.v),
                     hv11 = hphi_ * hermite11(c.v);

        const auto edge = [&](const std::vector<double> &f,
                              const std::vector<double> &fr, int j) {
            return hu00 * f[idx(c.ir, j)] + hu01 * f[idx(c.ir + 1, j)] +
                   hu10 * fr[idx(c.ir, j)] + hu11 * fr[idx(c.ir + 1, j)];
        };
        return hv00 * edge(val_, dr_, c.ja) + hv01 * edge(val_, dr_, c.jb) +
               hv10 * edge(dphi_, drphi_, c.ja) +
               hv11 * edge(dphi_, drphi_, c.jb);
    }

    /// Value plus first partials of the interpolant.
    struct Jet {
        double value;
        double dr;
        double dphi;
    };

    /// Interpolated value and partial derivatives at signed-polar
    /// coordinates, or nullopt outside the covered disk.
    std::optional<Jet> jet_polar(double r, double phi) const {
        if (!(std::abs(r) <= cover_)) {
            return std::nullopt;
        }
        const CellLoc c = locate(r, phi);
        // u-direction bases and their u-derivatives (the hr_ scale on the
        // derivative tables cancels against the 1/hr_ of d/dr once).
        const double hu00 = hermite00(c.u), hu01 = hermite01(c.u);
        const double hu10 = hr_ * hermite10(c.u), hu11 = hr_ * hermite11(c.u);
        const double du00 = hermite00d(c.u) / hr_, du01 = hermite01d(c.u) / hr_;
        const double du10 = hermite10d(c.u), du11 = hermite11d(c.u);
        const double hv00 = hermite00(c.v), hv01 = hermite01(c.v);
        const double hv10 = hphi_ * hermite10(c.v),
                     hv11 = hphi_ * hermite11(c.v);
        const double dv00 = hermite00d(c.v) / hphi_,
                     dv01 = hermite01d(c.v) / hphi_;
        const double dv10 = hermite10d(c.v), dv11 = hermite11d(c.v);

        const auto edge = [&](const std::vector<double> &f,
                              const std::vector<double> &fr, int j) {
            return hu00 * f[idx(c.ir, j)] + hu01 * f[idx(c.ir + 1, j)] +
                   hu10 * fr[idx(c.ir, j)] + hu11 * fr[idx(c.ir + 1, j)];
        };
        const auto edge_dr = [&](const std::vector<double> &f,
                                 const std::vector<double> &fr, int j) {
            return du00 * f[idx(c.ir, j)] + du01 * f[idx(c.ir + 1, j)] +
                   du10 * fr[idx(c.ir, j)] + du11 * fr[idx(c.ir + 1, j)];
        };
        const double va = edge(val_, dr_, c.ja), vb = edge(val_, dr_, c.jb);
        const double da = edge(dphi_, drphi_, c.ja),
                     db = edge(dphi_, drphi_, c.jb);
        Jet jet;
        jet.value = hv00 * va + hv01 * vb + hv10 * da + hv11 * db;
        jet.dr = hv00 * edge_dr(val_, dr_, c.ja) +
                 hv01 * edge_dr(val_, dr_, c.jb) +
                 hv10 * edge_dr(dphi_, drphi_, c.ja) +
                 hv11 * edge_dr(dphi_, drphi_, c.jb);
        jet.dphi = dv00 * va + dv01 * vb + dv10 * da + dv11 * db;
        return jet;
    }

    /// Stored value at extended node (i, j), j in [0, 4n).
    double value_node(int i, int j) const { return val_[idx(i, j)]; }

    /// Exact angular spline derivative at extended node (i, j).
    double dphi_node(int i, int j) const { return dphi_[idx(i, j)]; }

  private:
    static double hermite00(double t) { return ((2.0 * t - 3.0) * t) * t + 1.0; }
    static double hermite10(double t) { return ((t - 2.0) * t + 1.0) * t; }
    static double hermite01(double t) { return (3.0 - 2.0 * t) * t * t; }
    static double hermite11(double t) { return (t - 1.0) * t * t; }
    static double hermite00d(double t) { return 6.0 * t * (t - 1.0); }
    static double hermite10d(double t) { return (3.0 * t - 4.0) * t + 1.0; }
    static double hermite01d(double t) { return 6.0 * t * (1.0 - t); }
    static double hermite11d(double t) { return (3.0 * t - 2.0) * t; }

    /// Bicubic cell and local coordinates of a query point.
    struct CellLoc {
        int ir;   ///< radial cell, clamped to [0, m-2]
        double u; ///< radial local coordinate
        int ja;   ///< angular cell
        int jb;   ///< (ja + 1) mod 4n
        double v; ///< angular local coordinate
    };

    CellLoc locate(double r, double phi) const {
        const double tr = (r - r0_) / hr_;
        const int ir = std::clamp(static_cast<int>(std::floor(tr)), 0, m_ - 2);
        const double a = wrap_two_pi(phi);
        int ja = static_cast<int>(a / hphi_);
        if (ja >= na_) {
            ja = na_ - 1;
        }
        return {ir, tr - ir, ja, (ja + 1) % na_, a / hphi_ - ja};
    }

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * na_ + j;
    }

    PolarGrid grid_;
    int m_ = 0;   ///< 2n radii
    int na_ = 0;  ///< 4n extended angles
    double r0_ = 0.0, hr_ = 0.0, hphi_ = 0.0, cover_ = 0.0;
    std::vector<double> val_, dr_, dphi_, drphi_; ///< m_ x na_ tables
};

/// Complex-valued counterpart of PolarInterpolator for measurement frames:
/// real and imaginary parts are interpolated independently.
class MuInterpolator {
  public:
    explicit MuInterpolator(const MuFrame &frame)
        : re_(frame.grid, real_part(frame)), im_(frame.grid, imag_part(frame)) {}

    const PolarGrid &grid() const { return re_.grid(); }
    double cover_radius() const { return re_.cover_radius(); }

    std::optional<Complex> at(const Vec2 &k) const {
        const std::optional<double> re = re_.at(k);
        if (!re) {
            return std::nullopt;
        }
        return Complex(*re, *im_.at(k));
    }

    std::optional<Complex> at_polar(double r, double phi) const {
        const std::optional<double> re = re_.at_polar(r, phi);
        if (!re) {
            return std::nullopt;
        }
        return Complex(*re, *im_.at_polar(r, phi));
    }

  private:
    static std::vector<double> real_part(const MuFrame &f) {
        std::vector<double> v(f.values.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = f.values[i].real();
        }
        return v;
    }
    static std::vector<double> imag_part(const MuFrame &f) {
        std::vector<double> v(f.values.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = f.values[i].imag();
        }
        return v;
    }

    PolarInterpolator re_;
    PolarInterpolator im_;
};

} // namespace odt
