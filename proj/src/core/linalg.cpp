#include "linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <array>
#include <cmath>

#include "errors.hpp"

namespace resilience {

Matrix expm(const Matrix& a) {
    if (!a.allFinite()) throw NumericalError("expm: non-finite input");
    const Eigen::Index n = a.rows();
    // c_k = (2q-k)! q! / ((2q)! k! (q-k)!) for q = 6
    constexpr std::array<double, 7> c{1.0,
                                      1.0 / 2.0,
                                      5.0 / 44.0,
                                      1.0 / 66.0,
                                      1.0 / 792.0,
                                      1.0 / 15840.0,
                                      1.0 / 665280.0};
    double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
    Matrix x = a / std::ldexp(1.0, s);
    Matrix id = Matrix::Identity(n, n);
    Matrix num = id, den = id, p = id;
    for (std::size_t k = 1; k < c.size(); ++k) {
        p = p * x;
        num += c[k] * p;
        den += ((k % 2) ? -c[k] : c[k]) * p;
    }
    Matrix r = den.partialPivLu().solve(num);
    for (int i = 0; i < s; ++i) r = r * r;
    if (!r.allFinite()) throw NumericalError("expm: non-finite result");
    return r;
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double spectral_norm(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
}

double max_real_eigenvalue(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().real().maxCoeff();
}

Matrix lyapunov_solve(const Matrix& a, const Matrix& s) {
    const Eigen::Index n = a.rows();
    Matrix id = Matrix::Identity(n, n);
    // vec(A C + C A^T) = (I (x) A + A (x) I) vec(C), column-major vec.
    Matrix op = Matrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            op.block(i * n, j * n, n, n) += id(i, j) * a;
            op.block(i * n, j * n, n, n) += a(i, j) * id;
        }
    Eigen::FullPivLU<Matrix> lu(op);
    if (!lu.isInvertible()) throw NumericalError("Lyapunov operator is singular");
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(s.data(), n * n);
    Eigen::VectorXd v = lu.solve(rhs);
    Matrix c = Eigen::Map<Matrix>(v.data(), n, n);
    return 0.5 * (c + c.transpose());
}

}  // namespace resilience
