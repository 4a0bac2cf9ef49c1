#pragma once

#include <functional>
#include <vector>

namespace strataflow {

// General band matrix in LAPACK band storage, factored in place by dgbtrf.
// The unfactored band is kept for products and iterative refinement.
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    void add(int i, int j, double v);
    double get(int i, int j) const;
    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }

    std::vector<double> multiply(const std::vector<double>& x) const;

    // Throws SingularJacobian on a zero pivot.
    void factor();
    bool factored() const { return factored_; }
    void solve_in_place(std::vector<double>& b) const;

private:
    int n_ = 0, kl_ = 0, ku_ = 0, ld_ = 0;
    std::vector<double> band_;  // original, ld_ = kl + ku + 1 rows
    std::vector<double> lu_;    // factored, 2 kl + ku + 1 rows
    std::vector<int> ipiv_;
    bool factored_ = false;
};

// Solver for A = L + u w^T via Sherman-Morrison on a factored band L.
class RankOneSolver {
public:
    RankOneSolver(const BandMatrix& L, std::vector<double> u, std::vector<double> w);
    std::vector<double> solve(const std::vector<double>& b) const;
    std::vector<double> multiply(const std::vector<double>& x) const;
    double denominator() const { return denom_; }

private:
    const BandMatrix& L_;
    std::vector<double> u_, w_, z_;
    double denom_ = 1.0;
    bool has_u_ = false;
};

// Block elimination for [A C; B^T D] [x; y] = [f; r] with k border columns,
// followed by one step of iterative refinement.
struct BorderedSolution {
    std::vector<double> x;
    std::vector<double> y;
};
BorderedSolution solve_bordered(const std::function<std::vector<double>(const std::vector<double>&)>& solveA,
                                const std::function<std::vector<double>(const std::vector<double>&)>& mulA,
                                const std::vector<std::vector<double>>& C,
                                const std::vector<std::vector<double>>& B,
                                const std::vector<std::vector<double>>& D,
                                const std::vector<double>& f, const std::vector<double>& r);

}  // namespace strataflow
