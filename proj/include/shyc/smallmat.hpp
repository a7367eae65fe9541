#pragma once

// Dense linear algebra at small fixed capacity (dimension <= 16) and the
// explicit matrix constructions used by the couplings: Rodrigues rotations,
// frame alignment on S^2, the fixed-distance driver matrices, block
// rotations, frame completion and the trigonometric angle solver.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace shyc {

inline constexpr int kMaxDim = 16;

// Relative threshold for "x = +-y" and rank deficiency.
inline constexpr double kDegeneracyTol = 1e-10;
// Accepted deviation of a unit vector from norm one.
inline constexpr double kUnitTol = 1e-12;

class Vec {
public:
    Vec() = default;
    explicit Vec(int n) : n_(n) {
        if (n < 0 || n > kMaxDim) throw DomainError("vector dimension " + std::to_string(n));
        std::fill_n(v_.begin(), n_, 0.0);
    }
    Vec(std::initializer_list<double> xs) : Vec(static_cast<int>(xs.size())) {
        std::copy(xs.begin(), xs.end(), v_.begin());
    }
    explicit Vec(std::span<const double> xs) : Vec(static_cast<int>(xs.size())) {
        std::copy(xs.begin(), xs.end(), v_.begin());
    }

    static Vec zeros(int n) { return Vec(n); }
    static Vec basis(int n, int i) {
        Vec e(n);
        e[i] = 1.0;
        return e;
    }

    [[nodiscard]] int size() const noexcept { return n_; }
    double& operator[](int i) noexcept { return v_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const noexcept { return v_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::span<const double> span() const noexcept { return {v_.data(), static_cast<std::size_t>(n_)}; }
    [[nodiscard]] std::span<double> span() noexcept { return {v_.data(), static_cast<std::size_t>(n_)}; }

    Vec& operator+=(const Vec& o) noexcept {
        for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) noexcept {
        for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double s) noexcept {
        for (int i = 0; i < n_; ++i) v_[i] *= s;
        return *this;
    }
    Vec& operator/=(double s) noexcept { return *this *= 1.0 / s; }

    friend Vec operator+(Vec a, const Vec& b) noexcept { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) noexcept { return a -= b; }
    friend Vec operator-(Vec a) noexcept { return a *= -1.0; }
    friend Vec operator*(Vec a, double s) noexcept { return a *= s; }
    friend Vec operator*(double s, Vec a) noexcept { return a *= s; }
    friend Vec operator/(Vec a, double s) noexcept { return a /= s; }

    friend bool operator==(const Vec& a, const Vec& b) noexcept {
        return a.n_ == b.n_ && std::equal(a.v_.begin(), a.v_.begin() + a.n_, b.v_.begin());
    }

    [[nodiscard]] double dot(const Vec& o) const noexcept {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
        return s;
    }
    [[nodiscard]] double norm() const noexcept { return std::sqrt(dot(*this)); }
    [[nodiscard]] Vec normalized() const {
        const double n = norm();
        if (!(n > 0.0)) throw DegeneracyError("normalizing a zero vector");
        return *this / n;
    }
    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(v_.begin(), v_.begin() + n_, [](double x) { return std::isfinite(x); });
    }

private:
    std::array<double, kMaxDim> v_{};
    int n_ = 0;
};

inline double dot(const Vec& a, const Vec& b) noexcept { return a.dot(b); }

// Row-major matrix with up to kMaxDim x kMaxDim entries. Only the leading
// rows*cols slots are meaningful; copies touch just those.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : r_(rows), c_(cols) {
        if (rows < 0 || cols < 0 || rows > kMaxDim || cols > kMaxDim)
            throw DomainError("matrix shape " + std::to_string(rows) + "x" + std::to_string(cols));
        std::fill_n(a_.begin(), r_ * c_, 0.0);
    }
    Mat(std::initializer_list<std::initializer_list<double>> rows)
        : Mat(static_cast<int>(rows.size()), rows.size() ? static_cast<int>(rows.begin()->size()) : 0) {
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c_) throw DomainError("ragged matrix literal");
            int j = 0;
            for (double x : row) (*this)(i, j++) = x;
            ++i;
        }
    }
    Mat(const Mat& o) : r_(o.r_), c_(o.c_) { std::copy_n(o.a_.begin(), r_ * c_, a_.begin()); }
    Mat& operator=(const Mat& o) {
        r_ = o.r_;
        c_ = o.c_;
        std::copy_n(o.a_.begin(), r_ * c_, a_.begin());
        return *this;
    }

    static Mat zeros(int r, int c) { return Mat(r, c); }
    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat from_columns(std::span<const Vec> cols) {
        if (cols.empty()) return {};
        Mat m(cols.front().size(), static_cast<int>(cols.size()));
        for (int j = 0; j < m.c_; ++j) m.set_col(j, cols[static_cast<std::size_t>(j)]);
        return m;
    }
    static Mat outer(const Vec& a, const Vec& b) {
        Mat m(a.size(), b.size());
        for (int i = 0; i < a.size(); ++i)
            for (int j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
        return m;
    }

    [[nodiscard]] int rows() const noexcept { return r_; }
    [[nodiscard]] int cols() const noexcept { return c_; }
    double& operator()(int i, int j) noexcept { return a_[static_cast<std::size_t>(i * c_ + j)]; }
    double operator()(int i, int j) const noexcept { return a_[static_cast<std::size_t>(i * c_ + j)]; }

    [[nodiscard]] Vec col(int j) const {
        Vec v(r_);
        for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    [[nodiscard]] Vec row(int i) const {
        Vec v(c_);
        for (int j = 0; j < c_; ++j) v[j] = (*this)(i, j);
        return v;
    }
    void set_col(int j, const Vec& v) noexcept {
        for (int i = 0; i < r_; ++i) (*this)(i, j) = v[i];
    }

    [[nodiscard]] Mat transpose() const {
        Mat t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
    [[nodiscard]] double trace() const noexcept {
        double s = 0.0;
        for (int i = 0; i < std::min(r_, c_); ++i) s += (*this)(i, i);
        return s;
    }
    [[nodiscard]] double frobenius() const noexcept {
        double s = 0.0;
        for (int k = 0; k < r_ * c_; ++k) s += a_[k] * a_[k];
        return std::sqrt(s);
    }
    [[nodiscard]] double max_abs() const noexcept {
        double s = 0.0;
        for (int k = 0; k < r_ * c_; ++k) s = std::max(s, std::abs(a_[k]));
        return s;
    }

    Mat& operator+=(const Mat& o) noexcept {
        for (int k = 0; k < r_ * c_; ++k) a_[k] += o.a_[k];
        return *this;
    }
    Mat& operator-=(const Mat& o) noexcept {
        for (int k = 0; k < r_ * c_; ++k) a_[k] -= o.a_[k];
        return *this;
    }
    Mat& operator*=(double s) noexcept {
        for (int k = 0; k < r_ * c_; ++k) a_[k] *= s;
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) noexcept { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) noexcept { return a -= b; }
    friend Mat operator-(Mat a) noexcept { return a *= -1.0; }
    friend Mat operator*(Mat a, double s) noexcept { return a *= s; }
    friend Mat operator*(double s, Mat a) noexcept { return a *= s; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        assert(a.c_ == b.r_);
        Mat m(a.r_, b.c_);
        for (int i = 0; i < a.r_; ++i)
            for (int k = 0; k < a.c_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < b.c_; ++j) m(i, j) += aik * b(k, j);
            }
        return m;
    }
    friend Vec operator*(const Mat& a, const Vec& x) {
        assert(a.c_ == x.size());
        Vec y(a.r_);
        for (int i = 0; i < a.r_; ++i) {
            double s = 0.0;
            for (int j = 0; j < a.c_; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    std::array<double, kMaxDim * kMaxDim> a_;
    int r_ = 0;
    int c_ = 0;
};

// ---------------------------------------------------------------------------
// Generic helpers

inline Vec cross(const Vec& a, const Vec& b) {
    if (a.size() != 3 || b.size() != 3) throw DomainError("cross product needs 3-vectors");
    return Vec{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// [u]_x, the matrix of v -> u x v.
inline Mat skew(const Vec& u) {
    if (u.size() != 3) throw DomainError("skew matrix needs a 3-vector");
    return Mat{{0.0, -u[2], u[1]}, {u[2], 0.0, -u[0]}, {-u[1], u[0], 0.0}};
}

inline double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).max_abs(); }

// ||M'M - I||_max
inline double orthogonality_defect(const Mat& m) {
    return max_abs_diff(m.transpose() * m, Mat::identity(m.cols()));
}

inline double determinant(Mat m) {
    if (m.rows() != m.cols()) throw DomainError("determinant of a non-square matrix");
    const int n = m.rows();
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
        if (m(p, k) == 0.0) return 0.0;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            det = -det;
        }
        det *= m(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = m(i, k) / m(k, k);
            for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return det;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
inline std::vector<double> symmetric_eigenvalues(Mat a) {
    if (a.rows() != a.cols()) throw DomainError("eigenvalues of a non-square matrix");
    const int n = a.rows();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Largest singular value.
inline double operator_norm(const Mat& m) {
    const auto ev = symmetric_eigenvalues(m.transpose() * m);
    return std::sqrt(std::max(0.0, ev.back()));
}

// Modified Gram-Schmidt on the columns, keeping orientation.
inline Mat orthonormalize_columns(const Mat& m) {
    Mat q = m;
    for (int j = 0; j < q.cols(); ++j) {
        Vec v = q.col(j);
        for (int k = 0; k < j; ++k) {
            const Vec e = q.col(k);
            v -= e.dot(v) * e;
        }
        q.set_col(j, v.normalized());
    }
    return q;
}

inline void require_unit(const Vec& x, const char* name) {
    if (!x.all_finite() || std::abs(x.norm() - 1.0) > kUnitTol)
        throw DomainError(std::string(name) + " must be a unit vector");
}

// ---------------------------------------------------------------------------
// Rotations and frames on S^2

// Rotation about u = x cross y taking x to y:
//   R = cos(theta) I + [u]_x + u u' / (1 + cos(theta)),  [u]_x = y x' - x y'.
// R_{x,x} = I and R_{x,-x} = -I.
inline Mat rodrigues_rotation(const Vec& x, const Vec& y) {
    require_unit(x, "x");
    require_unit(y, "y");
    if (x.size() != 3 || y.size() != 3) throw DomainError("rodrigues_rotation works in R^3");
    // 1 + c = |x + y|^2 / 2 keeps full relative accuracy near y = -x
    const Vec sum = x + y;
    const double one_plus_c = 0.5 * sum.dot(sum);
    if (one_plus_c <= kDegeneracyTol) return -Mat::identity(3);
    const Vec u = cross(x, y);
    Mat r = (one_plus_c - 1.0) * Mat::identity(3) + Mat::outer(y, x) - Mat::outer(x, y);
    r += Mat::outer(u, u) * (1.0 / one_plus_c);
    return r;
}

// O_{X,Y}: the orthogonal matrix with columns X, (Y - cX)/s, (X x Y)/s,
// s = sqrt(1 - c^2), so that O e1 = X and O (c e1 + s e2) = Y.
inline Mat frame_align(const Vec& x, const Vec& y) {
    require_unit(x, "x");
    require_unit(y, "y");
    if (x.size() != 3 || y.size() != 3) throw DomainError("frame_align works in R^3");
    const double c = x.dot(y);
    if (std::abs(c) >= 1.0 - kDegeneracyTol) throw DegeneracyError("frame_align with x = +-y");
    // normalizing y - cX directly avoids the cancellation in 1 - c^2
    const Vec second = (y - c * x).normalized();
    Mat o(3, 3);
    o.set_col(0, x);
    o.set_col(1, second);
    o.set_col(2, cross(x, second));
    return o;
}

struct DriverMatrices {
    Mat j;
    Mat k;
};

// The reduced pair (J~, K~) in the frame where X = e1, Y = c e1 + s e2.
inline DriverMatrices fixed_distance_reduced(double c) {
    if (!(std::abs(c) < 1.0)) throw DegeneracyError("fixed_distance_reduced needs |c| < 1");
    const double s = std::sqrt(1.0 - c * c);
    return {Mat{{0.0, -s, 0.0}, {0.0, c, 0.0}, {0.0, 0.0, c}},
            Mat{{0.0, c, 0.0}, {0.0, s, 0.0}, {0.0, 0.0, s}}};
}

// (J, K) with J J' + K K' = I such that the driver dW = J dB + K dC keeps
// the spherical distance between X and Y constant.
inline DriverMatrices fixed_distance_matrices(const Vec& x, const Vec& y) {
    const Mat o = frame_align(x, y);
    const auto red = fixed_distance_reduced(x.dot(y));
    const Mat ot = o.transpose();
    return {o * red.j * ot, o * red.k * ot};
}

// Residuals of the three defining equations of the fixed-distance drivers.
struct FixedDistanceResiduals {
    double cross_term;   // X'JY - (c tr J - 1 - c^2)
    double diagonal;     // X'JX + Y'JY - c Y'JX - (tr J - 2c)
    double completeness; // max |JJ' + KK' - I|
};

inline FixedDistanceResiduals fixed_distance_residuals(const Vec& x, const Vec& y, const DriverMatrices& m) {
    const double c = x.dot(y);
    const double tr = m.j.trace();
    const double xjy = x.dot(m.j * y);
    const double xjx = x.dot(m.j * x);
    const double yjy = y.dot(m.j * y);
    const double yjx = y.dot(m.j * x);
    const Mat id = m.j * m.j.transpose() + m.k * m.k.transpose();
    return {xjy - (c * tr - 1.0 - c * c), xjx + yjy - c * yjx - (tr - 2.0 * c),
            max_abs_diff(id, Mat::identity(x.size()))};
}

// Principal solution in [0, 2pi) of a cos(alpha) + b sin(alpha) = c.
// For b >= 0 this is arccos(a/R) + arccos(c/R), R = sqrt(a^2 + b^2).
inline double solve_alpha(double a, double b, double c) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        throw DomainError("solve_alpha with non-finite coefficients");
    const double r = std::hypot(a, b);
    if (r == 0.0 || std::abs(c) > r * (1.0 + 1e-14))
        throw InfeasibleRateError("|c| exceeds sqrt(a^2 + b^2) in a cos + b sin = c");
    const double phase = std::atan2(b, a);
    double alpha = phase + std::acos(std::clamp(c / r, -1.0, 1.0));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    alpha = std::fmod(alpha, two_pi);
    if (alpha < 0.0) alpha += two_pi;
    if (alpha >= two_pi) alpha -= two_pi;
    return alpha;
}

// n/2 diagonal 2x2 blocks [[cos, sin], [-sin, cos]]; with fixed_first the
// matrix is (n+1)x(n+1) and fixes e1.
inline Mat block_rotation(int n, double alpha, bool fixed_first) {
    if (n < 0 || n % 2 != 0) throw DomainError("block_rotation needs an even block count");
    const int offset = fixed_first ? 1 : 0;
    Mat b = Mat::identity(n + offset);
    const double c = std::cos(alpha), s = std::sin(alpha);
    for (int k = offset; k < n + offset; k += 2) {
        b(k, k) = c;
        b(k, k + 1) = s;
        b(k + 1, k) = -s;
        b(k + 1, k + 1) = c;
    }
    return b;
}

// Unit vector completing d orthonormal vectors of R^{d+1} to a positively
// oriented basis (generalized cross product).
inline Vec complete_frame(std::span<const Vec> vectors) {
    const int d = static_cast<int>(vectors.size());
    if (d < 1 || d + 1 > kMaxDim) throw DomainError("complete_frame dimension");
    for (const auto& v : vectors)
        if (v.size() != d + 1) throw DomainError("complete_frame needs d vectors in R^{d+1}");
    Vec n(d + 1);
    for (int i = 0; i <= d; ++i) {
        Mat m(d + 1, d + 1);
        for (int j = 0; j < d; ++j) m.set_col(j, vectors[static_cast<std::size_t>(j)]);
        m(i, d) = 1.0;
        n[i] = determinant(m);
    }
    const double len = n.norm();
    if (len < kDegeneracyTol) throw DegeneracyError("complete_frame on rank-deficient input");
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const double g = vectors[static_cast<std::size_t>(a)].dot(vectors[static_cast<std::size_t>(b)]);
            if (std::abs(g - (a == b ? 1.0 : 0.0)) > kDegeneracyTol)
                throw DomainError("complete_frame inputs are not orthonormal");
        }
    return n / len;
}

// exp([w]_x): rotation by |w| about w / |w|.
inline Mat axis_angle_rotation(const Vec& w) {
    const double theta = w.norm();
    if (theta < 1e-300) return Mat::identity(3);
    const Mat k = skew(w / theta);
    return Mat::identity(3) + std::sin(theta) * k + (1.0 - std::cos(theta)) * (k * k);
}

// ---------------------------------------------------------------------------
// N-frames

// A linear map U: R^N -> T_x M with U U' = Id, stored as a d x N matrix in
// an orthonormal basis of T_x M. The vectors X_i = U e_i satisfy
// sum_i <xi, X_i> X_i = xi.
class NFrame {
public:
    NFrame(Vec base, Mat map) : base_(std::move(base)), map_(std::move(map)) {
        if (map_.cols() < map_.rows()) throw DomainError("N-frame needs N >= d");
        if (max_abs_diff(map_ * map_.transpose(), Mat::identity(map_.rows())) > 1e-12)
            throw DomainError("N-frame map violates U U' = Id");
    }

    // [I_d | 0]: the frame whose first d vectors are the basis itself.
    static NFrame canonical(Vec base, int d, int n) {
        Mat u(d, n);
        for (int i = 0; i < d; ++i) u(i, i) = 1.0;
        return {std::move(base), u};
    }

    [[nodiscard]] const Vec& base() const noexcept { return base_; }
    [[nodiscard]] const Mat& map() const noexcept { return map_; }
    [[nodiscard]] int dim() const noexcept { return map_.rows(); }
    [[nodiscard]] int n() const noexcept { return map_.cols(); }

    // N x N orthogonal A with A e_j = U' E_j (j <= d); for N = d + 1 the
    // last column is the positive completion of the first d.
    [[nodiscard]] Mat alignment() const {
        const int d = dim(), n_ = n();
        if (n_ != d && n_ != d + 1) throw DomainError("alignment defined for N = d or d + 1");
        const Mat ut = map_.transpose();
        std::vector<Vec> cols;
        cols.reserve(static_cast<std::size_t>(n_));
        for (int j = 0; j < d; ++j) cols.push_back(ut.col(j));
        if (n_ == d + 1) cols.push_back(complete_frame(cols));
        return Mat::from_columns(cols);
    }

private:
    Vec base_;
    Mat map_;
};

}  // namespace shyc
