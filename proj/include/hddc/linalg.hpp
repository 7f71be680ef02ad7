#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "hddc/errors.hpp"

namespace hddc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigenpairs sorted by descending eigenvalue; vectors holds one orthonormal
// column per value. zero_padded counts trailing pairs from a rank-deficient
// Gram-path solve: their values are exact zeros and the columns are an
// arbitrary orthonormal completion of the leading ones.
struct EigenPairs {
    Vector values;
    Matrix vectors;
    int zero_padded = 0;
};

// Weight-scaled, mean-centered observations for the small-n eigensolve path.
// Row j is sqrt(w_j) * (x_j - mean); rows with zero weight are dropped.
struct CenteredDesign {
    Matrix rows;
    double weight_total = 0.0;
};

namespace detail {

// Canonical sign: the largest-magnitude entry of each column is positive.
inline void fix_column_signs(Matrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        if (v(imax, j) < 0.0) v.col(j) = -v.col(j);
    }
}

// Extend the first `valid` orthonormal columns of v to `m` orthonormal
// columns; the leading columns are passed through untouched.
inline Matrix complete_orthonormal(const Matrix& v, int valid, int m) {
    const Eigen::Index p = v.rows();
    if (valid == 0) return Matrix::Identity(p, m);
    Eigen::HouseholderQR<Matrix> qr(v.leftCols(valid));
    Matrix q = qr.householderQ() * Matrix::Identity(p, m);
    Matrix out(p, m);
    out.leftCols(valid) = v.leftCols(valid);
    out.rightCols(m - valid) = q.rightCols(m - valid);
    return out;
}

}  // namespace detail

// (1/sum w) * sum_j w_j (x_j - mean)(x_j - mean)^t, stored exactly symmetric.
inline Matrix weighted_scatter(const Matrix& data, const Vector& weights,
                               const Vector& mean) {
    const Eigen::Index n = data.rows(), p = data.cols();
    if (weights.size() != n)
        throw InvalidInputError("weighted_scatter: weights length != n");
    if (mean.size() != p)
        throw InvalidInputError("weighted_scatter: mean length != p");
    if ((weights.array() < 0.0).any())
        throw InvalidInputError("weighted_scatter: negative weight");
    if (!weights.allFinite() || !data.allFinite() || !mean.allFinite())
        throw InvalidInputError("weighted_scatter: non-finite input");
    const double sw = weights.sum();
    if (!(sw > 0.0))
        throw DegenerateClusterError("weighted_scatter: zero total weight");

    Matrix centered = data.rowwise() - mean.transpose();
    centered.array().colwise() *= weights.array().sqrt();
    Matrix s = centered.transpose() * centered / sw;
    s = 0.5 * (s + s.transpose()).eval();
    return s;
}

// Full spectrum of a symmetric matrix, eigenvalues descending.
inline EigenPairs eig_desc(const Matrix& s) {
    const Eigen::Index p = s.rows();
    if (s.cols() != p) throw InvalidInputError("eig_desc: matrix not square");
    if (!s.allFinite()) throw InvalidInputError("eig_desc: non-finite entries");

    Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig_desc: eigensolver did not converge");

    EigenPairs out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    detail::fix_column_signs(out.vectors);
    return out;
}

// Leading m eigenpairs; shares the full backend and slices.
inline EigenPairs top_eig(const Matrix& s, int m) {
    if (m < 1 || m > s.rows())
        throw InvalidInputError("top_eig: m out of range");
    EigenPairs full = eig_desc(s);
    EigenPairs out;
    out.values = full.values.head(m);
    out.vectors = full.vectors.leftCols(m);
    return out;
}

// Design for the n_eff x n_eff Gram solve; drops zero-weight rows.
inline CenteredDesign make_centered_design(const Matrix& data,
                                           const Vector& weights,
                                           const Vector& mean) {
    const Eigen::Index n = data.rows(), p = data.cols();
    if (weights.size() != n)
        throw InvalidInputError("make_centered_design: weights length != n");
    if (mean.size() != p)
        throw InvalidInputError("make_centered_design: mean length != p");
    if ((weights.array() < 0.0).any())
        throw InvalidInputError("make_centered_design: negative weight");

    Eigen::Index n_eff = (weights.array() > 0.0).count();
    CenteredDesign d;
    d.rows.resize(n_eff, p);
    d.weight_total = weights.sum();
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (weights(j) > 0.0)
            d.rows.row(r++) =
                std::sqrt(weights(j)) * (data.row(j) - mean.transpose());
    }
    return d;
}

// Top-m eigenpairs of the p x p scatter rows^t rows / weight_total obtained
// from the n_eff x n_eff matrix rows rows^t / weight_total. Eigenvectors are
// mapped back through rows^t and renormalized; pairs beyond the numerical
// rank come back with value exactly 0 and are counted in zero_padded.
inline EigenPairs gram_top_eig(const CenteredDesign& design, int m) {
    const Eigen::Index n_eff = design.rows.rows(), p = design.rows.cols();
    if (m < 1 || m > std::min(n_eff, p))
        throw InvalidInputError("gram_top_eig: m out of range");
    if (!(design.weight_total > 0.0))
        throw InvalidInputError("gram_top_eig: non-positive weight total");

    Matrix gram = design.rows * design.rows.transpose() / design.weight_total;
    gram = 0.5 * (gram + gram.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericalError("gram_top_eig: eigensolver did not converge");

    Vector gvals = solver.eigenvalues().reverse();
    Matrix gvecs = solver.eigenvectors().rowwise().reverse();

    const double rank_tol = std::max(gvals(0), 0.0) * 1e-12;

    EigenPairs out;
    out.values = Vector::Zero(m);
    Matrix mapped = Matrix::Zero(p, m);
    int valid = 0;
    for (int j = 0; j < m; ++j) {
        if (gvals(j) > rank_tol) {
            Vector v = design.rows.transpose() * gvecs.col(j);
            const double norm = v.norm();
            if (norm > 0.0) {
                mapped.col(valid) = v / norm;
                out.values(valid) = gvals(j);
                ++valid;
            }
        }
    }
    out.zero_padded = m - valid;
    out.vectors = detail::complete_orthonormal(mapped, valid, m);
    detail::fix_column_signs(out.vectors);
    return out;
}

}  // namespace hddc
