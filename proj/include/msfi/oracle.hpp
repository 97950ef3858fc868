#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace msfi::oracle {

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

/// Finite-support cell law (at most 4 atoms, probabilities summing to 1).
struct CellLaw {
    std::vector<Atom> atoms;

    static CellLaw bernoulli(double p);
    static CellLaw from_atoms(std::vector<Atom> atoms);

    void validate() const;
};

/// Tiny discrete field with an enumerable law: n <= 12 cells, each with a
/// finite-support law, optionally duplicated from another cell (hard copy).
/// The total configuration count over independent cells is capped at 2^20.
struct TinyFieldSpec {
    std::vector<CellLaw> laws;
    /// duplicate_of[i] = -1 when cell i draws independently, otherwise the
    /// index of the cell it copies. Chains are allowed but must be acyclic.
    std::vector<int> duplicate_of;

    static TinyFieldSpec iid(int n, const CellLaw& law);

    void validate() const;
    int root_of(int cell) const;
    bool is_product() const;
};

/// Total bounded map from configurations to reals.
struct TinyFunctional {
    enum class Kind { Sum, CellProduct, ThresholdCount, Custom };

    Kind kind = Kind::Sum;
    double level = 0.0;  // ThresholdCount
    std::function<double(const std::vector<double>&)> custom;

    static TinyFunctional sum();
    static TinyFunctional cell_product();
    static TinyFunctional threshold_count(double level);
    static TinyFunctional custom_fn(std::function<double(const std::vector<double>&)> f);

    double operator()(const std::vector<double>& config) const;
    std::string label() const;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double fourth_central = 0.0;
};

/// Exact enumeration over all configurations weighted by the product law
/// (duplicates resolved). For dyadic laws every intermediate is a dyadic
/// rational, so the doubles returned are exact.
Moments exact_moments(const TinyFieldSpec& spec, const TinyFunctional& X);

struct OscillationResult {
    /// Exterior configuration (values of cells outside S, in index order)
    /// -> max-minus-min of X over the resampled cells in S.
    std::map<std::vector<double>, double> by_exterior;
    double mean_square = 0.0;  // E[osc^2]
};

/// Oscillation of X over resamplings inside S at fixed exterior. Cells in S
/// that copy (or are copied by) cells outside S are pinned by the exterior;
/// only duplicate classes fully contained in S vary.
OscillationResult exact_oscillation(const TinyFieldSpec& spec, const TinyFunctional& X,
                                    const std::vector<int>& S);

struct EfronSteinResult {
    double variance = 0.0;
    double rhs = 0.0;  // (1/2) sum over cells of E[osc_cell^2]
    bool holds = false;
};

/// Discrete single-cell spectral gap check Var[X] <= (1/2) sum E[osc_i^2];
/// an inequality for product laws, so `holds` failing indicates a bug.
/// Rejects specs with duplicates.
EfronSteinResult efron_stein_check(const TinyFieldSpec& spec, const TinyFunctional& X);

/// Exact alpha-mixing coefficient between sigma(A|_S) and sigma(A|_T):
/// sup over all event pairs of |P[G1 & G2] - P[G1] P[G2]|, by enumerating
/// subsets of atoms on the S side (the optimal T event is the positive part
/// of the signed measure, found in closed form). Caps each side at 16 atoms.
double exact_alpha(const TinyFieldSpec& spec, const std::vector<int>& S,
                   const std::vector<int>& T);

}  // namespace msfi::oracle
