#pragma once

// Small dense linear algebra on component matrices, backed by Eigen.

#include <Eigen/Dense>

#include "curvid/tensor.hpp"

namespace curvid {

inline Eigen::Matrix4d to_eigen4(const Tensor& m)
{
    Eigen::Matrix4d e = Eigen::Matrix4d::Identity();
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
    return e;
}

inline Eigen::MatrixXd to_eigen(const Tensor& m)
{
    Eigen::MatrixXd e(m.dim(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
    return e;
}

inline Tensor from_eigen(const Eigen::MatrixXd& e)
{
    Tensor m(static_cast<int>(e.rows()), 2);
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

inline double determinant(const Tensor& m) { return to_eigen(m).determinant(); }

inline Tensor inverse(const Tensor& m) { return from_eigen(to_eigen(m).partialPivLu().inverse()); }

/// Number of negative eigenvalues of a symmetric matrix.
inline int negative_inertia(const Tensor& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m), Eigen::EigenvaluesOnly);
    int neg = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < 0.0) ++neg;
    return neg;
}

inline double min_eigenvalue(const Tensor& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline bool is_positive_definite(const Tensor& m)
{
    Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(m));
    return llt.info() == Eigen::Success;
}

}  // namespace curvid
