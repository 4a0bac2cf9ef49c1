#include "strataflow/banded.hpp"

#include <cmath>
#include <sstream>

#include <lapacke.h>

#include "strataflow/error.hpp"

// Unblocked band LU. The blocked dgbtrf of some optimized BLAS builds returns wrong
// factors for bandwidths above 64, so the level-2 routine is called directly.
extern "C" void dgbtf2_(const int* m, const int* n, const int* kl, const int* ku, double* ab, const int* ldab,
                        int* ipiv, int* info);

namespace strataflow {

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ld_(kl + ku + 1), band_(std::size_t(ld_) * n, 0.0) {}

void BandMatrix::add(int i, int j, double v) {
    if (!in_band(i, j)) fail(ErrorCode::Internal, "entry outside the band");
    band_[std::size_t(j) * ld_ + (ku_ + i - j)] += v;
    factored_ = false;
}

double BandMatrix::get(int i, int j) const {
    if (!in_band(i, j)) return 0.0;
    return band_[std::size_t(j) * ld_ + (ku_ + i - j)];
}

std::vector<double> BandMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        double xj = x[j];
        if (xj == 0.0) continue;
        int i0 = std::max(0, j - ku_), i1 = std::min(n_ - 1, j + kl_);
        const double* col = &band_[std::size_t(j) * ld_];
        for (int i = i0; i <= i1; ++i) y[i] += col[ku_ + i - j] * xj;
    }
    return y;
}

void BandMatrix::factor() {
    const int ldab = 2 * kl_ + ku_ + 1;
    lu_.assign(std::size_t(ldab) * n_, 0.0);
    for (int j = 0; j < n_; ++j)
        for (int r = 0; r < ld_; ++r) lu_[std::size_t(j) * ldab + kl_ + r] = band_[std::size_t(j) * ld_ + r];
    ipiv_.assign(n_, 0);
    std::vector<int> piv(n_);
    int info = 0;
    dgbtf2_(&n_, &n_, &kl_, &ku_, lu_.data(), &ldab, piv.data(), &info);
    if (info < 0) fail(ErrorCode::Internal, "dgbtf2 argument error");
    if (info > 0) {
        std::ostringstream os;
        os << "zero pivot at row " << info;
        fail(ErrorCode::SingularJacobian, os.str());
    }
    for (int i = 0; i < n_; ++i) ipiv_[i] = int(piv[i]);
    factored_ = true;
}

void BandMatrix::solve_in_place(std::vector<double>& b) const {
    if (!factored_) fail(ErrorCode::Internal, "band matrix not factored");
    const int ldab = 2 * kl_ + ku_ + 1;
    std::vector<lapack_int> piv(ipiv_.begin(), ipiv_.end());
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, lu_.data(), ldab, piv.data(),
                                     b.data(), n_);
    if (info != 0) fail(ErrorCode::Internal, "dgbtrs failed");
    for (double v : b)
        if (!std::isfinite(v)) fail(ErrorCode::SingularJacobian, "non-finite solution of the banded system");
}

RankOneSolver::RankOneSolver(const BandMatrix& L, std::vector<double> u, std::vector<double> w)
    : L_(L), u_(std::move(u)), w_(std::move(w)) {
    for (double v : u_)
        if (v != 0.0) has_u_ = true;
    if (has_u_) {
        z_ = u_;
        L_.solve_in_place(z_);
        double wz = 0.0;
        for (std::size_t i = 0; i < z_.size(); ++i) wz += w_[i] * z_[i];
        denom_ = 1.0 + wz;
        if (std::fabs(denom_) <= 1e-13 * (1.0 + std::fabs(wz)))
            fail(ErrorCode::SingularJacobian, "Sherman-Morrison denominator vanishes");
    }
}

std::vector<double> RankOneSolver::solve(const std::vector<double>& b) const {
    std::vector<double> y = b;
    L_.solve_in_place(y);
    if (!has_u_) return y;
    double wy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) wy += w_[i] * y[i];
    double s = wy / denom_;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= s * z_[i];
    return y;
}

std::vector<double> RankOneSolver::multiply(const std::vector<double>& x) const {
    std::vector<double> y = L_.multiply(x);
    if (!has_u_) return y;
    double wx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) wx += w_[i] * x[i];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += u_[i] * wx;
    return y;
}

namespace {

// Small dense solve with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const int k = int(b.size());
    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        if (A[piv][c] == 0.0) fail(ErrorCode::SingularJacobian, "singular bordered Schur complement");
        std::swap(A[piv], A[c]);
        std::swap(b[piv], b[c]);
        for (int r = c + 1; r < k; ++r) {
            double m = A[r][c] / A[c][c];
            for (int cc = c; cc < k; ++cc) A[r][cc] -= m * A[c][cc];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(k);
    for (int r = k - 1; r >= 0; --r) {
        double s = b[r];
        for (int cc = r + 1; cc < k; ++cc) s -= A[r][cc] * x[cc];
        x[r] = s / A[r][r];
    }
    return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

BorderedSolution solve_bordered(const std::function<std::vector<double>(const std::vector<double>&)>& solveA,
                                const std::function<std::vector<double>(const std::vector<double>&)>& mulA,
                                const std::vector<std::vector<double>>& C,
                                const std::vector<std::vector<double>>& B,
                                const std::vector<std::vector<double>>& D,
                                const std::vector<double>& f, const std::vector<double>& r) {
    const std::size_t k = C.size();
    std::vector<std::vector<double>> AinvC(k);
    for (std::size_t c = 0; c < k; ++c) AinvC[c] = solveA(C[c]);

    std::vector<std::vector<double>> S(k, std::vector<double>(k));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) S[a][c] = D[a][c] - dot(B[a], AinvC[c]);

    auto one_pass = [&](const std::vector<double>& ff, const std::vector<double>& rr) {
        std::vector<double> Ainvf = solveA(ff);
        std::vector<double> rhs(k);
        for (std::size_t a = 0; a < k; ++a) rhs[a] = rr[a] - dot(B[a], Ainvf);
        std::vector<double> y = dense_solve(S, rhs);
        std::vector<double> x = Ainvf;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= AinvC[c][i] * y[c];
        return BorderedSolution{x, y};
    };

    BorderedSolution s = one_pass(f, r);
    // One refinement step against the full bordered operator.
    std::vector<double> rf = mulA(s.x);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < rf.size(); ++i) rf[i] += C[c][i] * s.y[c];
    for (std::size_t i = 0; i < rf.size(); ++i) rf[i] = f[i] - rf[i];
    std::vector<double> rr(k);
    for (std::size_t a = 0; a < k; ++a) {
        double v = dot(B[a], s.x);
        for (std::size_t c = 0; c < k; ++c) v += D[a][c] * s.y[c];
        rr[a] = r[a] - v;
    }
    BorderedSolution corr = one_pass(rf, rr);
    for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] += corr.x[i];
    for (std::size_t c = 0; c < k; ++c) s.y[c] += corr.y[c];
    return s;
}

}  // namespace strataflow
