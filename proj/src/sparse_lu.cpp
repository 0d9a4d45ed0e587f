#include "iwave/sparse_lu.hpp"

#include <cmath>

#include <umfpack.h>

namespace iw {

namespace {

const double* packed(const std::complex<double>* p) { return reinterpret_cast<const double*>(p); }
double* packed(std::complex<double>* p) { return reinterpret_cast<double*>(p); }

}  // namespace

SparseLU::~SparseLU() { release(); }

void SparseLU::release() {
    if (numeric_) umfpack_zl_free_numeric(&numeric_);
    numeric_ = nullptr;
    ok_ = false;
}

bool SparseLU::factorize(const Eigen::SparseMatrix<std::complex<double>>& A) {
    release();
    Eigen::SparseMatrix<std::complex<double>> C = A;
    C.makeCompressed();
    n_ = C.rows();
    if (C.rows() != C.cols()) {
        msg_ = "matrix not square";
        return false;
    }
    Ap_.assign(C.outerIndexPtr(), C.outerIndexPtr() + n_ + 1);
    Ai_.assign(C.innerIndexPtr(), C.innerIndexPtr() + C.nonZeros());
    Ax_.assign(C.valuePtr(), C.valuePtr() + C.nonZeros());

    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_zl_defaults(control);
    void* symbolic = nullptr;
    long st = umfpack_zl_symbolic(n_, n_, Ap_.data(), Ai_.data(), packed(Ax_.data()), nullptr, &symbolic, control, info);
    if (st != UMFPACK_OK) {
        msg_ = "umfpack symbolic status " + std::to_string(st);
        return false;
    }
    st = umfpack_zl_numeric(Ap_.data(), Ai_.data(), packed(Ax_.data()), nullptr, symbolic, &numeric_, control, info);
    umfpack_zl_free_symbolic(&symbolic);
    rcond_ = info[UMFPACK_RCOND];
    if (st != UMFPACK_OK) {
        msg_ = st == UMFPACK_WARNING_singular_matrix ? "singular matrix" : "umfpack numeric status " + std::to_string(st);
        if (numeric_) umfpack_zl_free_numeric(&numeric_);
        numeric_ = nullptr;
        return false;
    }
    ok_ = true;
    msg_.clear();
    return true;
}

Eigen::VectorXcd SparseLU::solve_sys(long sys, const Eigen::VectorXcd& b) const {
    Eigen::VectorXcd x(n_);
    if (!ok_) {
        x.setConstant(std::complex<double>(NAN, NAN));
        return x;
    }
    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_zl_defaults(control);
    control[UMFPACK_IRSTEP] = refine_;
    umfpack_zl_solve(sys, Ap_.data(), Ai_.data(), packed(Ax_.data()), nullptr, packed(x.data()), nullptr,
                     packed(b.data()), nullptr, numeric_, control, info);
    return x;
}

Eigen::VectorXcd SparseLU::solve(const Eigen::VectorXcd& b) const { return solve_sys(UMFPACK_A, b); }
// UMFPACK_At is the complex conjugate transpose
Eigen::VectorXcd SparseLU::solve_adjoint(const Eigen::VectorXcd& b) const { return solve_sys(UMFPACK_At, b); }

Eigen::MatrixXcd SparseLU::solve(const Eigen::MatrixXcd& B) const {
    Eigen::MatrixXcd X(B.rows(), B.cols());
    for (int c = 0; c < B.cols(); ++c) X.col(c) = solve(Eigen::VectorXcd(B.col(c)));
    return X;
}

Eigen::MatrixXcd SparseLU::solve_adjoint(const Eigen::MatrixXcd& B) const {
    Eigen::MatrixXcd X(B.rows(), B.cols());
    for (int c = 0; c < B.cols(); ++c) X.col(c) = solve_adjoint(Eigen::VectorXcd(B.col(c)));
    return X;
}

}  // namespace iw
