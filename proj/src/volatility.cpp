#include "flexhawkes/volatility.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flexhawkes {

namespace {

using Eigen::Matrix2d;
using Eigen::Matrix4d;
using Eigen::Vector2d;
using Eigen::Vector4d;

void check_bivariate(const MvExcitationParams& p) {
    if (p.dim() != 2) throw std::invalid_argument("volatility formulas need a two-type model");
    p.validate();
}

Matrix2d beta_matrix(const MvExcitationParams& p) {
    return Vector2d(p.beta[0], p.beta[1]).asDiagonal();
}

Matrix2d alpha_matrix(const MvExcitationParams& p) {
    return p.alpha.topLeftCorner<2, 2>();
}

Matrix2d zbar(const MarkMoments& m) {
    Matrix2d z;
    z << m.mean[0], m.mean[1], m.mean[0], m.mean[1];
    return z;
}

Matrix2d zbar2(const MarkMoments& m) {
    Matrix2d z;
    z << m.second[0], m.second[1], m.second[0], m.second[1];
    return z;
}

Matrix2d raw_moment(const Matrix2d& second, const Vector2d& e, MomentInterpretation interp) {
    return interp == MomentInterpretation::centered ? Matrix2d(second + e * e.transpose()) : second;
}

Matrix2d b_residual(const MvExcitationParams& p, const MarkMoments& marks, const Vector2d& e,
                    const Matrix2d& second, const Matrix2d& B, MomentInterpretation interp) {
    const Matrix2d a = alpha_matrix(p);
    const Matrix2d z = zbar(marks);
    const Matrix2d moment = raw_moment(second, e, interp);
    const Matrix2d dg_z = Vector2d(z(0, 0), z(1, 1)).asDiagonal();
    return B * (a - beta_matrix(p)).transpose() + z.transpose().cwiseProduct(moment) +
           e.asDiagonal() * a.cwiseProduct(z).transpose() - dg_z * e * e.transpose();
}

}  // namespace

MarkMoments MarkMoments::from_marks(const EventSeries& series) {
    MarkMoments m;
    Vector2d sum = Vector2d::Zero();
    Vector2d sum2 = Vector2d::Zero();
    Vector2d count = Vector2d::Zero();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int ty = series.types[i];
        if (ty < 0 || ty > 1) throw std::invalid_argument("mark moments need types 0 and 1 only");
        const double z = series.has_marks() ? series.marks[i] : 1.0;
        sum[ty] += z;
        sum2[ty] += z * z;
        count[ty] += 1.0;
    }
    for (int i = 0; i < 2; ++i) {
        if (count[i] == 0.0) throw std::invalid_argument("mark moments need events of both types");
        m.mean[i] = sum[i] / count[i];
        m.second[i] = sum2[i] / count[i];
    }
    return m;
}

void MarkMoments::validate() const {
    for (int i = 0; i < 2; ++i) {
        if (!(mean[i] > 0.0) || !(second[i] > 0.0)) throw std::invalid_argument("mark moments must be positive");
        if (second[i] < mean[i] * mean[i] * (1.0 - 1e-12)) {
            throw std::invalid_argument("mark second moment must be >= squared mean");
        }
    }
}

std::string to_string(MomentInterpretation m) {
    return m == MomentInterpretation::centered ? "centered" : "literal";
}

MomentInterpretation parse_interpretation(const std::string& s) {
    if (s == "centered") return MomentInterpretation::centered;
    if (s == "literal") return MomentInterpretation::literal;
    throw std::invalid_argument("moment interpretation must be 'centered' or 'literal'");
}

Vector2d expected_lambda(const MvExcitationParams& p) {
    check_bivariate(p);
    const Matrix2d bm = beta_matrix(p);
    const Matrix2d diff = bm - alpha_matrix(p);
    if (std::fabs(diff.determinant()) < 1e-14 * bm.norm() * bm.norm()) {
        throw std::invalid_argument("beta - alpha is singular; the stability condition is violated");
    }
    return diff.partialPivLu().solve(bm * Vector2d(p.mu[0], p.mu[1]));
}

Matrix2d lambda_second_moment(const MvExcitationParams& p, const Vector2d& e) {
    check_bivariate(p);
    const Matrix2d a = alpha_matrix(p);
    const Matrix2d A = a - beta_matrix(p);
    const Matrix2d Q = a * e.asDiagonal() * a.transpose();
    // vec(A S + S A^T) = (I kron A + A kron I) vec(S)
    const Matrix2d I = Matrix2d::Identity();
    Matrix4d K;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            K.block<2, 2>(2 * i, 2 * j) = I(i, j) * A + A(i, j) * I;
        }
    }
    const Eigen::FullPivLU<Matrix4d> lu(K);
    if (!lu.isInvertible()) throw std::runtime_error("Lyapunov system is singular");
    const Vector4d s = lu.solve(-Eigen::Map<const Vector4d>(Q.data()));
    Matrix2d S = Eigen::Map<const Matrix2d>(s.data());
    return 0.5 * (S + S.transpose());
}

Matrix2d solve_B(const MvExcitationParams& p, const MarkMoments& marks, const Vector2d& e,
                 const Matrix2d& second, MomentInterpretation interp) {
    check_bivariate(p);
    marks.validate();
    const Matrix2d At = (alpha_matrix(p) - beta_matrix(p)).transpose();
    const Eigen::FullPivLU<Matrix2d> lu(At);
    if (!lu.isInvertible()) throw std::runtime_error("(alpha - beta)^T is singular");
    // B At = -R0 where R0 is the residual at B = 0
    const Matrix2d r0 = b_residual(p, marks, e, second, Matrix2d::Zero(), interp);
    return -r0 * lu.inverse();
}

VolatilityResiduals volatility_residuals(const MvExcitationParams& p, const MarkMoments& marks,
                                         const VolatilitySolution& s) {
    const Matrix2d a = alpha_matrix(p);
    const Matrix2d bm = beta_matrix(p);
    const Matrix2d A = a - bm;
    VolatilityResiduals r;
    r.expected_lambda = ((bm - a) * s.expected_lambda - bm * Vector2d(p.mu[0], p.mu[1])).norm();
    r.lambda_second = (A * s.lambda_second + s.lambda_second * A.transpose() +
                       a * s.expected_lambda.asDiagonal() * a.transpose())
                          .norm();
    r.B = b_residual(p, marks, s.expected_lambda, s.lambda_second, s.B, s.interpretation).norm();
    return r;
}

VolatilitySolution solve_volatility(const MvExcitationParams& p, const MarkMoments& marks, double t,
                                    MomentInterpretation interp) {
    if (!(t > 0.0)) throw std::invalid_argument("volatility horizon must be positive");
    VolatilitySolution s;
    s.interpretation = interp;
    s.horizon = t;
    s.expected_lambda = expected_lambda(p);
    s.lambda_second = lambda_second_moment(p, s.expected_lambda);
    s.B = solve_B(p, marks, s.expected_lambda, s.lambda_second, interp);
    const Matrix2d z = zbar(marks);
    const Matrix2d zb = z.cwiseProduct(s.B);
    const Matrix2d bracket = zb + zb.transpose() +
                             zbar2(marks).cwiseProduct(Matrix2d(s.expected_lambda.asDiagonal()));
    const Vector2d u(1.0, -1.0);
    const double q = u.dot(bracket * u);
    if (q < 0.0) {
        std::ostringstream os;
        os << "negative quadratic form " << q << " in the volatility formula; bracket =\n" << bracket;
        throw std::runtime_error(os.str());
    }
    s.hvol = std::sqrt(q * t);
    return s;
}

double hawkes_vol(const MvExcitationParams& p, const MarkMoments& marks, double t, MomentInterpretation interp) {
    return solve_volatility(p, marks, t, interp).hvol;
}

double weighted_difference(const EventSeries& path, double t) {
    double diff = 0.0;
    for (std::size_t i = 0; i < path.size() && path.times[i] <= t; ++i) {
        const double z = path.has_marks() ? path.marks[i] : 1.0;
        if (path.types[i] == 0) {
            diff += z;
        } else if (path.types[i] == 1) {
            diff -= z;
        }
    }
    return diff;
}

double empirical_vol(std::span<const EventSeries> paths, double t) {
    if (paths.size() < 2) throw std::invalid_argument("empirical volatility needs at least two paths");
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (const auto& path : paths) {
        const double x = weighted_difference(path, t);
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    return std::sqrt(m2 / static_cast<double>(n - 1));
}

}  // namespace flexhawkes
