#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace iw {

// Complex sparse LU (UMFPACK) with solves against A and its conjugate transpose.
// Not copyable; one instance per factorization.
class SparseLU {
public:
    SparseLU() = default;
    explicit SparseLU(const Eigen::SparseMatrix<std::complex<double>>& A) { factorize(A); }
    ~SparseLU();
    SparseLU(const SparseLU&) = delete;
    SparseLU& operator=(const SparseLU&) = delete;

    // false when the matrix is singular to working precision (or UMFPACK fails)
    bool factorize(const Eigen::SparseMatrix<std::complex<double>>& A);
    bool ok() const { return ok_; }
    const std::string& message() const { return msg_; }
    // reciprocal pivot growth style estimate from UMFPACK (rcond of the diagonal of U)
    double rcond() const { return rcond_; }
    // UMFPACK iterative refinement steps used by the solves (default 2)
    void set_refinement(int steps) { refine_ = steps; }

    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
    Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& b) const;
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& B) const;
    Eigen::MatrixXcd solve_adjoint(const Eigen::MatrixXcd& B) const;

private:
    Eigen::VectorXcd solve_sys(long sys, const Eigen::VectorXcd& b) const;
    void release();

    std::vector<long> Ap_, Ai_;
    std::vector<std::complex<double>> Ax_;
    void* numeric_ = nullptr;
    long n_ = 0;
    bool ok_ = false;
    double rcond_ = 0.0;
    int refine_ = 2;
    std::string msg_;
};

}  // namespace iw
