#include <Eigen/Dense>
#include <cmath>

#include "isslab/errors.hpp"
#include "isslab/semigroup.hpp"

namespace isslab::semigroup {

// Scaling and squaring with the [13/13] Pade approximant. The scaling
// exponent keeps |A/2^s|_1 below theta_13, for which the approximant is
// accurate to unit roundoff in exact arithmetic.
Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw PreconditionError("expm needs a square matrix");
    if (!A.allFinite()) throw PreconditionError("expm of a non-finite matrix");
    const Eigen::Index n = A.rows();
    if (n == 0) return A;

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Eigen::MatrixXd As = A / std::ldexp(1.0, s);

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd A2 = As * As;
    const Eigen::MatrixXd A4 = A2 * A2;
    const Eigen::MatrixXd A6 = A4 * A2;

    Eigen::MatrixXd inner = b[13] * A6 + b[11] * A4 + b[9] * A2;
    Eigen::MatrixXd U = As * (A6 * inner + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    inner = b[12] * A6 + b[10] * A4 + b[8] * A2;
    Eigen::MatrixXd V = A6 * inner + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

Eigen::MatrixXd phi1_times_t(const Eigen::MatrixXd& A, double t) {
    if (A.rows() != A.cols()) throw PreconditionError("phi1 needs a square matrix");
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = t * A;
    aug.topRightCorner(n, n) = t * Eigen::MatrixXd::Identity(n, n);
    return expm_pade13(aug).topRightCorner(n, n);
}

}  // namespace isslab::semigroup
