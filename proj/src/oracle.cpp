#include "msfi/oracle.hpp"

#include "msfi/common.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace msfi::oracle {

CellLaw CellLaw::bernoulli(double p) {
    CellLaw law;
    law.atoms = {{0.0, 1.0 - p}, {1.0, p}};
    law.validate();
    return law;
}

CellLaw CellLaw::from_atoms(std::vector<Atom> atoms) {
    CellLaw law;
    law.atoms = std::move(atoms);
    law.validate();
    return law;
}

void CellLaw::validate() const {
    if (atoms.empty() || atoms.size() > 4) {
        throw std::invalid_argument("CellLaw: support size must lie in [1, 4]");
    }
    double total = 0.0;
    for (const auto& a : atoms) {
        if (a.prob < 0.0) throw std::invalid_argument("CellLaw: negative probability");
        total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("CellLaw: probabilities must sum to 1");
    }
}

TinyFieldSpec TinyFieldSpec::iid(int n, const CellLaw& law) {
    TinyFieldSpec spec;
    spec.laws.assign(n, law);
    spec.duplicate_of.assign(n, -1);
    spec.validate();
    return spec;
}

void TinyFieldSpec::validate() const {
    int n = static_cast<int>(laws.size());
    if (n < 1 || n > 12) throw std::invalid_argument("TinyFieldSpec: n must lie in [1, 12]");
    if (static_cast<int>(duplicate_of.size()) != n) {
        throw std::invalid_argument("TinyFieldSpec: duplicate_of size mismatch");
    }
    for (const auto& law : laws) law.validate();
    long long configs = 1;
    for (int i = 0; i < n; ++i) {
        int src = duplicate_of[i];
        if (src < -1 || src >= n || src == i) {
            throw std::invalid_argument("TinyFieldSpec: bad duplicate index");
        }
        // Acyclicity: walking the chain must terminate.
        int steps = 0;
        int j = i;
        while (duplicate_of[j] != -1) {
            j = duplicate_of[j];
            if (++steps > n) throw std::invalid_argument("TinyFieldSpec: duplicate cycle");
        }
        if (duplicate_of[i] == -1) {
            configs *= static_cast<long long>(laws[i].atoms.size());
            if (configs > (1 << 20)) {
                throw std::invalid_argument("TinyFieldSpec: configuration count exceeds 2^20");
            }
        }
    }
}

int TinyFieldSpec::root_of(int cell) const {
    int j = cell;
    while (duplicate_of[j] != -1) j = duplicate_of[j];
    return j;
}

bool TinyFieldSpec::is_product() const {
    return std::all_of(duplicate_of.begin(), duplicate_of.end(),
                       [](int s) { return s == -1; });
}

TinyFunctional TinyFunctional::sum() { return TinyFunctional{}; }

TinyFunctional TinyFunctional::cell_product() {
    TinyFunctional f;
    f.kind = Kind::CellProduct;
    return f;
}

TinyFunctional TinyFunctional::threshold_count(double level) {
    TinyFunctional f;
    f.kind = Kind::ThresholdCount;
    f.level = level;
    return f;
}

TinyFunctional TinyFunctional::custom_fn(std::function<double(const std::vector<double>&)> fn) {
    TinyFunctional f;
    f.kind = Kind::Custom;
    f.custom = std::move(fn);
    return f;
}

double TinyFunctional::operator()(const std::vector<double>& config) const {
    switch (kind) {
        case Kind::Sum: {
            double s = 0.0;
            for (double v : config) s += v;
            return s;
        }
        case Kind::CellProduct: {
            double p = 1.0;
            for (double v : config) p *= v;
            return p;
        }
        case Kind::ThresholdCount: {
            double count = 0.0;
            for (double v : config) count += v >= level ? 1.0 : 0.0;
            return count;
        }
        case Kind::Custom:
            return custom(config);
    }
    return 0.0;
}

std::string TinyFunctional::label() const {
    switch (kind) {
        case Kind::Sum: return "sum";
        case Kind::CellProduct: return "cell_product";
        case Kind::ThresholdCount: return "threshold_count";
        case Kind::Custom: return "custom";
    }
    return "?";
}

namespace {

struct Enumerator {
    const TinyFieldSpec& spec;
    std::vector<int> roots;  // independent cells, in index order

    explicit Enumerator(const TinyFieldSpec& s) : spec(s) {
        int n = static_cast<int>(s.laws.size());
        for (int i = 0; i < n; ++i) {
            if (s.duplicate_of[i] == -1) roots.push_back(i);
        }
    }

    /// Calls visit(config, prob) for every configuration of the full field.
    void for_each(const std::function<void(const std::vector<double>&, double)>& visit) const {
        int n = static_cast<int>(spec.laws.size());
        std::vector<std::size_t> idx(roots.size(), 0);
        std::vector<double> config(n, 0.0);
        while (true) {
            double prob = 1.0;
            for (std::size_t k = 0; k < roots.size(); ++k) {
                const auto& atom = spec.laws[roots[k]].atoms[idx[k]];
                config[roots[k]] = atom.value;
                prob *= atom.prob;
            }
            for (int i = 0; i < n; ++i) {
                if (spec.duplicate_of[i] != -1) config[i] = config[spec.root_of(i)];
            }
            visit(config, prob);
            std::size_t k = 0;
            for (; k < roots.size(); ++k) {
                if (++idx[k] < spec.laws[roots[k]].atoms.size()) break;
                idx[k] = 0;
            }
            if (k == roots.size()) break;
        }
    }
};

}  // namespace

Moments exact_moments(const TinyFieldSpec& spec, const TinyFunctional& X) {
    spec.validate();
    Enumerator en(spec);
    double mean = 0.0;
    en.for_each([&](const std::vector<double>& config, double prob) { mean += prob * X(config); });
    Moments m;
    m.mean = mean;
    double var = 0.0, fourth = 0.0;
    en.for_each([&](const std::vector<double>& config, double prob) {
        double dev = X(config) - mean;
        var += prob * dev * dev;
        fourth += prob * dev * dev * dev * dev;
    });
    m.variance = var;
    m.fourth_central = fourth;
    return m;
}

OscillationResult exact_oscillation(const TinyFieldSpec& spec, const TinyFunctional& X,
                                    const std::vector<int>& S) {
    spec.validate();
    if (S.empty()) throw std::invalid_argument("exact_oscillation: S must be nonempty");
    int n = static_cast<int>(spec.laws.size());
    std::set<int> s_set;
    for (int cell : S) {
        if (cell < 0 || cell >= n) throw std::invalid_argument("exact_oscillation: bad cell index");
        s_set.insert(cell);
    }

    // A root varies under resampling of S only if its whole duplicate class
    // sits inside S; any member outside S pins the value.
    std::vector<bool> root_free(n, false);
    for (int i = 0; i < n; ++i) {
        if (spec.duplicate_of[i] == -1) root_free[i] = s_set.count(i) > 0;
    }
    for (int i = 0; i < n; ++i) {
        if (s_set.count(i) == 0) root_free[spec.root_of(i)] = false;
    }

    std::vector<int> free_roots, pinned_roots;
    for (int i = 0; i < n; ++i) {
        if (spec.duplicate_of[i] != -1) continue;
        if (root_free[i]) {
            free_roots.push_back(i);
        } else {
            pinned_roots.push_back(i);
        }
    }

    OscillationResult result;
    std::vector<double> config(n, 0.0);
    std::vector<std::size_t> pin_idx(pinned_roots.size(), 0);
    while (true) {
        double prob = 1.0;
        for (std::size_t k = 0; k < pinned_roots.size(); ++k) {
            const auto& atom = spec.laws[pinned_roots[k]].atoms[pin_idx[k]];
            config[pinned_roots[k]] = atom.value;
            prob *= atom.prob;
        }
        // Max/min of X over the free-root configurations at this exterior.
        double lo = 0.0, hi = 0.0;
        bool first = true;
        std::vector<std::size_t> free_idx(free_roots.size(), 0);
        while (true) {
            for (std::size_t k = 0; k < free_roots.size(); ++k) {
                config[free_roots[k]] = spec.laws[free_roots[k]].atoms[free_idx[k]].value;
            }
            for (int i = 0; i < n; ++i) {
                if (spec.duplicate_of[i] != -1) config[i] = config[spec.root_of(i)];
            }
            double v = X(config);
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            std::size_t k = 0;
            for (; k < free_roots.size(); ++k) {
                if (++free_idx[k] < spec.laws[free_roots[k]].atoms.size()) break;
                free_idx[k] = 0;
            }
            if (k == free_roots.size()) break;
        }
        double osc = hi - lo;

        std::vector<double> exterior;
        for (int i = 0; i < n; ++i) {
            if (s_set.count(i) == 0) exterior.push_back(config[i]);
        }
        result.by_exterior[exterior] = osc;
        result.mean_square += prob * osc * osc;

        std::size_t k = 0;
        for (; k < pinned_roots.size(); ++k) {
            if (++pin_idx[k] < spec.laws[pinned_roots[k]].atoms.size()) break;
            pin_idx[k] = 0;
        }
        if (k == pinned_roots.size()) break;
    }
    return result;
}

EfronSteinResult efron_stein_check(const TinyFieldSpec& spec, const TinyFunctional& X) {
    spec.validate();
    if (!spec.is_product()) {
        throw std::invalid_argument("efron_stein_check: requires a product law (no duplicates)");
    }
    EfronSteinResult result;
    result.variance = exact_moments(spec, X).variance;
    KahanSum rhs;
    int n = static_cast<int>(spec.laws.size());
    for (int i = 0; i < n; ++i) {
        rhs.add(exact_oscillation(spec, X, {i}).mean_square);
    }
    result.rhs = 0.5 * rhs.value();
    result.holds = result.variance <= result.rhs + 1e-12 * std::max(1.0, result.rhs);
    return result;
}

double exact_alpha(const TinyFieldSpec& spec, const std::vector<int>& S,
                   const std::vector<int>& T) {
    spec.validate();
    if (S.empty() || T.empty()) throw std::invalid_argument("exact_alpha: S, T must be nonempty");
    int n = static_cast<int>(spec.laws.size());
    std::set<int> s_set(S.begin(), S.end()), t_set(T.begin(), T.end());
    for (int cell : S) {
        if (cell < 0 || cell >= n) throw std::invalid_argument("exact_alpha: bad cell index");
        if (t_set.count(cell)) throw std::invalid_argument("exact_alpha: S and T must be disjoint");
    }
    for (int cell : T) {
        if (cell < 0 || cell >= n) throw std::invalid_argument("exact_alpha: bad cell index");
    }

    // Joint atom table of (A|_S, A|_T).
    std::map<std::vector<double>, int> s_atoms, t_atoms;
    std::vector<std::vector<double>> joint;  // joint[s][t]
    Enumerator en(spec);
    en.for_each([&](const std::vector<double>& config, double prob) {
        std::vector<double> sv, tv;
        for (int cell : S) sv.push_back(config[cell]);
        for (int cell : T) tv.push_back(config[cell]);
        auto [si, s_new] = s_atoms.try_emplace(sv, static_cast<int>(s_atoms.size()));
        auto [ti, t_new] = t_atoms.try_emplace(tv, static_cast<int>(t_atoms.size()));
        std::size_t srow = static_cast<std::size_t>(si->second);
        std::size_t tcol = static_cast<std::size_t>(ti->second);
        if (joint.size() <= srow) joint.resize(srow + 1);
        for (auto& row : joint) {
            if (row.size() < t_atoms.size()) row.resize(t_atoms.size(), 0.0);
        }
        joint[srow][tcol] += prob;
    });

    std::size_t ns = s_atoms.size(), nt = t_atoms.size();
    if (ns > 16 || nt > 16) {
        throw std::invalid_argument("exact_alpha: atom count exceeds 16 per side");
    }
    std::vector<double> ps(ns, 0.0), pt(nt, 0.0);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            ps[i] += joint[i][j];
            pt[j] += joint[i][j];
        }
    }

    // For fixed G1, the optimal G2 collects the atoms where
    // P[G1, t] - P[G1] P[t] is positive (the negative part has equal mass).
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << ns); ++mask) {
        double p1 = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            if (mask & (1u << i)) p1 += ps[i];
        }
        double positive = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
            double q = -p1 * pt[j];
            for (std::size_t i = 0; i < ns; ++i) {
                if (mask & (1u << i)) q += joint[i][j];
            }
            if (q > 0.0) positive += q;
        }
        best = std::max(best, positive);
    }
    return best;
}

}  // namespace msfi::oracle
