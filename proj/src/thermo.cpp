#include "pmetric/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pmetric/error.hpp"

namespace pmetric {

std::vector<Word> admissible_words(const TransitionStructure& ts, std::size_t length) {
    std::vector<Word> out;
    if (length == 0) return out;
    Word w;
    auto extend = [&](auto&& self) -> void {
        if (w.size() == length) {
            out.push_back(w);
            return;
        }
        for (std::size_t next : ts.successors(w.back())) {
            w.push_back(next);
            self(self);
            w.pop_back();
        }
    };
    for (std::size_t s = 0; s < ts.size(); ++s) {
        w.assign(1, s);
        extend(extend);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Potential

Potential::Potential(std::size_t depth, std::size_t alphabet, std::vector<Word> words, std::vector<double> values)
    : depth_(depth), alphabet_(alphabet), words_(std::move(words)), values_(std::move(values)) {}

Potential::Potential(const TransitionStructure& ts, std::size_t depth, std::vector<double> values)
    : depth_(depth), alphabet_(ts.size()), words_(admissible_words(ts, depth)), values_(std::move(values)) {
    if (depth == 0) throw DomainError("potential depth must be positive");
    if (values_.size() != words_.size())
        throw DomainError("potential of depth " + std::to_string(depth) + " needs " + std::to_string(words_.size()) +
                          " values, got " + std::to_string(values_.size()));
}

Potential Potential::from_function(const TransitionStructure& ts, std::size_t depth,
                                   const std::function<double(std::span<const std::size_t>)>& f) {
    std::vector<Word> words = admissible_words(ts, depth);
    std::vector<double> values;
    values.reserve(words.size());
    for (const Word& w : words) values.push_back(f(w));
    return Potential(depth, ts.size(), std::move(words), std::move(values));
}

Potential Potential::constant(const TransitionStructure& ts, std::size_t depth, double c) {
    return from_function(ts, depth, [c](std::span<const std::size_t>) { return c; });
}

Potential Potential::edge_lengths(const TransitionStructure& ts, const std::vector<double>& lengths) {
    if (lengths.size() != ts.edge_count())
        throw DomainError("expected " + std::to_string(ts.edge_count()) + " edge values, got " +
                          std::to_string(lengths.size()));
    return from_function(ts, 1, [&lengths](std::span<const std::size_t> w) { return lengths[w[0] / 2]; });
}

double Potential::operator()(std::span<const std::size_t> word) const {
    if (word.size() != depth_) throw DomainError("potential evaluated on a word of the wrong length");
    auto it = std::lower_bound(words_.begin(), words_.end(), word, [](const Word& a, std::span<const std::size_t> b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    if (it == words_.end() || !std::equal(it->begin(), it->end(), word.begin(), word.end()))
        throw DomainError("potential evaluated on a non-admissible word");
    return values_[static_cast<std::size_t>(it - words_.begin())];
}

Potential Potential::lifted(const TransitionStructure& ts, std::size_t depth) const {
    if (ts.size() != alphabet_) throw DomainError("potential lifted over a different alphabet");
    if (depth < depth_) throw DomainError("cannot lift a potential to a smaller depth");
    if (depth == depth_) return *this;
    return from_function(ts, depth, [this](std::span<const std::size_t> w) { return (*this)(w.first(depth_)); });
}

double Potential::min_value() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }
double Potential::max_value() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

Potential Potential::operator-() const { return *this * -1.0; }

Potential Potential::operator+(double c) const {
    Potential out = *this;
    for (double& v : out.values_) v += c;
    return out;
}

Potential Potential::operator*(double c) const {
    Potential out = *this;
    for (double& v : out.values_) v *= c;
    return out;
}

void Potential::require_compatible(const Potential& other) const {
    if (depth_ != other.depth_ || alphabet_ != other.alphabet_)
        throw DomainError("potentials differ in depth or alphabet; lift them first");
}

Potential Potential::operator+(const Potential& other) const {
    require_compatible(other);
    Potential out = *this;
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] += other.values_[i];
    return out;
}

Potential Potential::operator-(const Potential& other) const {
    require_compatible(other);
    Potential out = *this;
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] -= other.values_[i];
    return out;
}

Potential coboundary(const TransitionStructure& ts, const Potential& u) {
    const std::size_t d = u.depth();
    return Potential::from_function(ts, d + 1, [&u, d](std::span<const std::size_t> w) {
        return u(w.first(d)) - u(w.subspan(1, d));
    });
}

// ---------------------------------------------------------------------------
// Recoding and Perron data

Word WordShift::transition_word(std::size_t from, std::size_t to) const {
    Word w = states.at(from);
    w.push_back(states.at(to).back());
    return w;
}

WordShift recode(const TransitionStructure& ts, std::size_t word_length) {
    if (word_length == 0) throw DomainError("recoding needs a positive word length");
    WordShift shift;
    shift.word_length = word_length;
    shift.states = admissible_words(ts, word_length);
    shift.successors.assign(shift.states.size(), {});
    for (std::size_t i = 0; i < shift.states.size(); ++i) {
        const Word& from = shift.states[i];
        Word next(from.begin() + 1, from.end());
        next.push_back(0);
        for (std::size_t s : ts.successors(from.back())) {
            next.back() = s;
            auto it = std::lower_bound(shift.states.begin(), shift.states.end(), next);
            shift.successors[i].push_back(static_cast<std::size_t>(it - shift.states.begin()));
        }
    }
    return shift;
}

namespace {

Eigen::VectorXd null_vector(const Eigen::MatrixXd& m, double rho) {
    const Eigen::Index n = m.rows();
    Eigen::MatrixXd system(n + 1, n);
    system.topRows(n) = m - rho * Eigen::MatrixXd::Identity(n, n);
    system.row(n).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    Eigen::VectorXd v = system.colPivHouseholderQr().solve(rhs);
    return v;
}

void finish(PerronData& out, const Eigen::MatrixXd& m) {
    if ((out.right.array() <= 0.0).any() || (out.left.array() <= 0.0).any())
        throw DomainError("Perron vector is not strictly positive; the matrix is reducible");
    out.right /= out.right.sum();
    out.left /= out.left.dot(out.right);
    out.rho = out.left.dot(m * out.right);
}

} // namespace

PerronData perron_dense(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    const auto& ev = solver.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i)
        if (ev(i).real() > ev(best).real()) best = i;
    PerronData out;
    out.rho = ev(best).real();
    if (!(out.rho > 0.0)) throw DomainError("transfer matrix has no positive Perron value");
    out.right = null_vector(m, out.rho);
    out.left = null_vector(m.transpose(), out.rho);
    finish(out, m);
    return out;
}

PerronData perron_power(const Eigen::MatrixXd& m, double tolerance, std::size_t max_iterations) {
    const Eigen::Index n = m.rows();
    // M + I is primitive whenever M is irreducible, whatever the period of M.
    const Eigen::MatrixXd shifted = m + Eigen::MatrixXd::Identity(n, n);
    auto iterate = [&](const Eigen::MatrixXd& a, Eigen::VectorXd& v, std::size_t& steps) {
        v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        double lambda = 0.0;
        for (steps = 1; steps <= max_iterations; ++steps) {
            Eigen::VectorXd next = a * v;
            const double next_lambda = next.sum() / v.sum();
            next /= next.sum();
            const bool done = steps > 1 && std::abs(next_lambda - lambda) <= tolerance * next_lambda &&
                              (next - v).lpNorm<Eigen::Infinity>() <= 1e3 * tolerance * next.lpNorm<Eigen::Infinity>();
            v = next;
            lambda = next_lambda;
            if (done) return lambda;
        }
        throw DomainError("power iteration did not converge within " + std::to_string(max_iterations) + " steps");
    };
    PerronData out;
    std::size_t right_steps = 0;
    std::size_t left_steps = 0;
    iterate(shifted, out.right, right_steps);
    iterate(shifted.transpose(), out.left, left_steps);
    out.iterations = std::max(right_steps, left_steps);
    finish(out, m);
    return out;
}

PerronData perron(const Eigen::MatrixXd& m) {
    if (m.rows() < kDenseLimit) return perron_dense(m);
    return perron_power(m);
}

double WeightedMatrix::log_rho() const { return std::log(perron.rho) + offset; }

namespace {

std::size_t default_state_length(const Potential& f) { return std::max<std::size_t>(f.depth(), 2) - 1; }

void require_irreducible(const TransitionStructure& ts) {
    if (!ts.irreducible()) throw DomainError("transition structure is reducible");
}

} // namespace

WeightedMatrix weighted_matrix(const TransitionStructure& ts, const Potential& f, std::size_t state_length) {
    require_irreducible(ts);
    if (f.alphabet_size() != ts.size()) throw DomainError("potential and transition structure use different alphabets");
    if (state_length == 0) state_length = default_state_length(f);
    if (f.depth() > state_length + 1)
        throw DomainError("state length " + std::to_string(state_length) + " is too short for a depth-" +
                          std::to_string(f.depth()) + " potential");
    WeightedMatrix out;
    out.shift = recode(ts, state_length);
    out.offset = f.max_value();
    const auto n = static_cast<Eigen::Index>(out.shift.size());
    out.matrix = Eigen::MatrixXd::Zero(n, n);
    const std::size_t d = f.depth();
    for (std::size_t i = 0; i < out.shift.size(); ++i) {
        for (std::size_t j : out.shift.successors[i]) {
            const Word w = out.shift.transition_word(i, j);
            const double value = f(std::span<const std::size_t>(w).last(d));
            out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(value - out.offset);
        }
    }
    out.perron = perron(out.matrix);
    return out;
}

double pressure(const TransitionStructure& ts, const Potential& f) { return weighted_matrix(ts, f).log_rho(); }

namespace {

double cyclic_birkhoff_sum(const Word& cycle, const Potential& f) {
    const std::size_t p = cycle.size();
    const std::size_t d = f.depth();
    Word window(d);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < d; ++k) window[k] = cycle[(i + k) % p];
        total += f(window);
    }
    return total;
}

} // namespace

double pressure_by_counting(const TransitionStructure& ts, const Potential& f, std::size_t n, double cap) {
    if (n == 0) throw DomainError("pressure_by_counting needs n >= 1");
    if (f.alphabet_size() != ts.size()) throw DomainError("potential and transition structure use different alphabets");
    const double predicted = predicted_periodic_points(ts, n);
    if (predicted > cap)
        throw ResourceLimit("pressure_by_counting: " + std::to_string(predicted) + " periodic points exceed cap");
    const double offset = f.max_value();
    double sum = 0.0;
    std::size_t count = 0;
    Word cycle;
    cycle.reserve(n);
    auto dfs = [&](auto&& self) -> void {
        if (cycle.size() == n) {
            if (ts.allowed(cycle.back(), cycle.front())) {
                sum += std::exp(cyclic_birkhoff_sum(cycle, f) - static_cast<double>(n) * offset);
                ++count;
            }
            return;
        }
        for (std::size_t next : ts.successors(cycle.back())) {
            cycle.push_back(next);
            self(self);
            cycle.pop_back();
        }
    };
    for (std::size_t s = 0; s < ts.size(); ++s) {
        cycle.assign(1, s);
        dfs(dfs);
    }
    if (count == 0) throw DomainError("no periodic points of period " + std::to_string(n));
    return std::log(sum) / static_cast<double>(n) + offset;
}

// ---------------------------------------------------------------------------
// Equilibrium states

EquilibriumState equilibrium_state(const TransitionStructure& ts, const Potential& f, std::size_t state_length) {
    WeightedMatrix wm = weighted_matrix(ts, f, state_length);
    const PerronData& pd = wm.perron;
    const Eigen::Index n = wm.matrix.rows();
    EquilibriumState out;
    out.transition = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (wm.matrix(i, j) != 0.0) out.transition(i, j) = wm.matrix(i, j) * pd.right(j) / (pd.rho * pd.right(i));
        }
        // absorb rounding so each row is a probability vector
        out.transition.row(i) /= out.transition.row(i).sum();
    }
    out.stationary = pd.left.cwiseProduct(pd.right);
    out.stationary /= out.stationary.sum();
    out.pressure = wm.log_rho();
    out.shift = std::move(wm.shift);
    return out;
}

EquilibriumState markov_state(WordShift shift, const Eigen::MatrixXd& transition) {
    const auto n = static_cast<Eigen::Index>(shift.size());
    if (transition.rows() != n || transition.cols() != n) throw DomainError("transition matrix has the wrong size");
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& succ = shift.successors[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool allowed = std::find(succ.begin(), succ.end(), static_cast<std::size_t>(j)) != succ.end();
            if (transition(i, j) < 0.0 || (!allowed && transition(i, j) != 0.0))
                throw DomainError("transition matrix charges a forbidden transition");
        }
        if (std::abs(transition.row(i).sum() - 1.0) > 1e-12) throw DomainError("transition rows must sum to 1");
    }
    // stationary vector: pi (Q - I) = 0, sum pi = 1
    Eigen::MatrixXd system(n + 1, n);
    system.topRows(n) = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    system.row(n).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    EquilibriumState out;
    out.stationary = system.colPivHouseholderQr().solve(rhs);
    out.transition = transition;
    out.pressure = std::numeric_limits<double>::quiet_NaN();
    out.shift = std::move(shift);
    return out;
}

double markov_entropy(const EquilibriumState& state) {
    double h = 0.0;
    const Eigen::Index n = state.transition.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double q = state.transition(i, j);
            if (q > 0.0) h -= state.stationary(i) * q * std::log(q);
        }
    return h;
}

namespace {

// Value of g on every transition of the chain (first depth() symbols of
// the transition word).
Eigen::MatrixXd transition_values(const Potential& g, const EquilibriumState& state) {
    const std::size_t k = state.shift.word_length;
    if (g.depth() > k + 1)
        throw DomainError("depth mismatch: a depth-" + std::to_string(g.depth()) +
                          " potential needs states of length >= " + std::to_string(g.depth() - 1));
    const auto n = static_cast<Eigen::Index>(state.shift.size());
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < state.shift.size(); ++i)
        for (std::size_t j : state.shift.successors[i]) {
            const Word w = state.shift.transition_word(i, j);
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                g(std::span<const std::size_t>(w).first(g.depth()));
        }
    return values;
}

} // namespace

double integrate(const Potential& f, const EquilibriumState& state) {
    const Eigen::MatrixXd values = transition_values(f, state);
    return (state.stationary.asDiagonal() * state.transition).cwiseProduct(values).sum();
}

VarianceResult variance(const Potential& g, const EquilibriumState& state, Centering centering) {
    Eigen::MatrixXd values = transition_values(g, state);
    const Eigen::MatrixXd flow = state.stationary.asDiagonal() * state.transition;  // pi_i Q_ij
    VarianceResult out;
    out.mean = flow.cwiseProduct(values).sum();
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (std::abs(out.mean) > 1e-10 * scale && centering == Centering::Require)
        throw DomainError("variance of a non-centered potential (mean " + std::to_string(out.mean) + ")");
    const auto n = values.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (state.transition(i, j) > 0.0) values(i, j) -= out.mean;

    // Poisson equation (I - Q + 1 pi) h = E[g | X_0]; then
    // Var = E[g^2] + 2 E[g(X_0, X_1) h(X_1)].
    const Eigen::VectorXd expected_next = state.transition.cwiseProduct(values).rowwise().sum();
    Eigen::MatrixXd fundamental = Eigen::MatrixXd::Identity(n, n) - state.transition;
    fundamental.rowwise() += state.stationary.transpose();
    const Eigen::VectorXd h = fundamental.partialPivLu().solve(expected_next);
    out.value = flow.cwiseProduct(values.cwiseProduct(values)).sum() +
                2.0 * (flow.cwiseProduct(values) * h).sum();
    if (out.value < 0.0 && out.value > -1e-12 * scale * scale) out.value = 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Entropy

EntropySolution solve_topological_entropy(const TransitionStructure& ts, const Potential& f) {
    if (!(f.min_value() > 0.0)) throw DomainError("topological entropy needs a strictly positive potential");
    auto p_at = [&](double s) { return pressure(ts, f * -s); };
    double lo = 0.0;
    double p_lo = p_at(lo);
    if (!(p_lo > 0.0)) throw DomainError("P(0) is not positive; the shift has no entropy");
    double hi = 1.0 / f.max_value();
    double p_hi = p_at(hi);
    while (p_hi >= 0.0) {
        lo = hi;
        p_lo = p_hi;
        hi *= 2.0;
        p_hi = p_at(hi);
        if (!std::isfinite(hi)) throw DomainError("entropy bracket diverged");
    }
    if (!(p_lo > p_hi)) throw DomainError("s -> P(-sF) is not decreasing on the bracket");

    EntropySolution out;
    double mid = 0.5 * (lo + hi);
    double p_mid = p_at(mid);
    while (std::abs(p_mid) > 1e-12 && hi - lo > 1e-15 * hi) {
        if (p_mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        p_mid = p_at(mid);
        ++out.bisection_steps;
    }
    // Newton polish: dP/ds = -integral of F against the equilibrium state of -sF.
    double s = mid;
    for (int step = 0; step < 3; ++step) {
        const EquilibriumState eq = equilibrium_state(ts, f * -s);
        const double slope = -integrate(f, eq);
        const double next = s - eq.pressure / slope;
        if (!(next > 0.0)) break;
        s = next;
    }
    out.entropy = s;
    out.residual = p_at(s);
    return out;
}

double topological_entropy(const TransitionStructure& ts, const Potential& f) {
    return solve_topological_entropy(ts, f).entropy;
}

double entropy_by_counting(const TransitionStructure& ts, const MetricGraph& graph, double horizon, CountMode mode,
                           double cap) {
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    const std::vector<double> lengths = graph.lengths();
    const double shortest = *std::min_element(lengths.begin(), lengths.end());
    const double ratio = horizon / shortest;
    if (ratio > 1e6) throw ResourceLimit("horizon too large for enumeration");
    const auto max_period = static_cast<std::size_t>(std::ceil(ratio)) - 1;
    double count = 0.0;
    for (const ClosedGeodesic& g : enumerate_closed_geodesics(ts, max_period, cap)) {
        if (geodesic_length(g, graph) >= horizon) continue;
        if (mode == CountMode::Geodesics) {
            count += 1.0;
        } else {
            std::size_t d = 1;
            while (d < g.period() && !(g.period() % d == 0 && std::equal(g.word.begin() + d, g.word.end(), g.word.begin())))
                ++d;
            count += static_cast<double>(d);
        }
    }
    if (count == 0.0) throw DomainError("no geodesics below T");
    return std::log(count) / horizon;
}

double livsic_period(const ClosedGeodesic& g, const Potential& f) {
    if (g.word.empty()) throw DomainError("empty geodesic");
    return cyclic_birkhoff_sum(g.word, f);
}

bool is_cohomologous(const Potential& f1, const Potential& f2, const TransitionStructure& ts, std::size_t max_period) {
    if (f1.alphabet_size() != ts.size() || f2.alphabet_size() != ts.size())
        throw DomainError("potentials do not share the alphabet");
    for (const ClosedGeodesic& g : enumerate_closed_geodesics(ts, max_period)) {
        const double a = livsic_period(g, f1);
        const double b = livsic_period(g, f2);
        if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a))) return false;
    }
    return true;
}

} // namespace pmetric
