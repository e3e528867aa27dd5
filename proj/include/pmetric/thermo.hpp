#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmetric/graph_core.hpp"

namespace pmetric {

using Word = std::vector<std::size_t>;

// Admissible words of the given length, in lexicographic order.
std::vector<Word> admissible_words(const TransitionStructure& ts, std::size_t length);

// Locally constant function of depth n: one real value per admissible n-word.
// F(x) = value(x_0 ... x_{n-1}).
class Potential {
public:
    Potential(const TransitionStructure& ts, std::size_t depth, std::vector<double> values);

    static Potential from_function(const TransitionStructure& ts, std::size_t depth,
                                   const std::function<double(std::span<const std::size_t>)>& f);
    static Potential constant(const TransitionStructure& ts, std::size_t depth, double c);
    // F_l: the length of the base edge of x_0.
    static Potential edge_lengths(const TransitionStructure& ts, const std::vector<double>& lengths);

    std::size_t depth() const { return depth_; }
    std::size_t alphabet_size() const { return alphabet_; }
    const std::vector<Word>& words() const { return words_; }
    const std::vector<double>& values() const { return values_; }

    // Value on an admissible word of length depth().
    double operator()(std::span<const std::size_t> word) const;

    // The same function seen as a potential of larger depth.
    Potential lifted(const TransitionStructure& ts, std::size_t depth) const;

    double min_value() const;
    double max_value() const;

    Potential operator-() const;
    Potential operator+(double c) const;
    Potential operator*(double c) const;
    friend Potential operator*(double c, const Potential& f) { return f * c; }
    // Both operands must share depth and alphabet.
    Potential operator+(const Potential& other) const;
    Potential operator-(const Potential& other) const;

private:
    Potential(std::size_t depth, std::size_t alphabet, std::vector<Word> words, std::vector<double> values);
    void require_compatible(const Potential& other) const;

    std::size_t depth_;
    std::size_t alphabet_;
    std::vector<Word> words_;
    std::vector<double> values_;
};

// u - u o sigma for a potential u; the result has depth u.depth() + 1.
Potential coboundary(const TransitionStructure& ts, const Potential& u);

// Higher-block presentation: states are admissible words of length
// `word_length`, a transition i -> j exists when states[j] continues
// states[i] by one symbol. The transition spells the word
// states[i] followed by states[j].back().
struct WordShift {
    std::size_t word_length = 1;
    std::vector<Word> states;
    std::vector<std::vector<std::size_t>> successors;

    std::size_t size() const { return states.size(); }
    Word transition_word(std::size_t from, std::size_t to) const;
};

WordShift recode(const TransitionStructure& ts, std::size_t word_length);

struct PerronData {
    double rho = 0.0;
    Eigen::VectorXd left;   // strictly positive, left.dot(right) == 1
    Eigen::VectorXd right;  // strictly positive, sums to 1
    std::size_t iterations = 0;
};

// Perron data of an irreducible nonnegative matrix. Dimensions below
// kDenseLimit use a dense eigensolver, larger ones power iteration on M + I.
inline constexpr Eigen::Index kDenseLimit = 200;
PerronData perron(const Eigen::MatrixXd& m);
PerronData perron_dense(const Eigen::MatrixXd& m);
PerronData perron_power(const Eigen::MatrixXd& m, double tolerance = 1e-14, std::size_t max_iterations = 100000);

// Transfer matrix of a potential on the recoded shift. Entry (i, j) is
// exp(F(w) - offset) where w is the last depth() symbols of the transition
// word; for a depth-1 potential this is the column factor exp(F(x_1)).
struct WeightedMatrix {
    WordShift shift;
    Eigen::MatrixXd matrix;
    double offset = 0.0;
    PerronData perron;

    double log_rho() const;
};

WeightedMatrix weighted_matrix(const TransitionStructure& ts, const Potential& f, std::size_t state_length = 0);

// Stationary Markov measure on a recoded shift; for an equilibrium state
// `pressure` holds P(F).
struct EquilibriumState {
    WordShift shift;
    Eigen::VectorXd stationary;
    Eigen::MatrixXd transition;
    double pressure = 0.0;
};

double pressure(const TransitionStructure& ts, const Potential& f);

// (1/n) log sum over fixed points of sigma^n of exp(S_n F), by enumeration.
double pressure_by_counting(const TransitionStructure& ts, const Potential& f, std::size_t n,
                            double cap = kDefaultEnumerationCap);

// state_length 0 picks max(depth - 1, 1).
EquilibriumState equilibrium_state(const TransitionStructure& ts, const Potential& f, std::size_t state_length = 0);

// Markov measure with the given transition matrix (support must match the
// shift's transitions, rows must sum to 1).
EquilibriumState markov_state(WordShift shift, const Eigen::MatrixXd& transition);

double markov_entropy(const EquilibriumState& state);

double integrate(const Potential& f, const EquilibriumState& state);

enum class Centering { Require, Subtract };

struct VarianceResult {
    double value = 0.0;
    double mean = 0.0;  // mean removed before computing the variance
};

// Asymptotic variance of Birkhoff sums under a Markov measure, from the
// Poisson equation of the chain.
VarianceResult variance(const Potential& g, const EquilibriumState& state, Centering centering = Centering::Require);

struct EntropySolution {
    double entropy = 0.0;
    double residual = 0.0;  // P(-h F)
    std::size_t bisection_steps = 0;
};

EntropySolution solve_topological_entropy(const TransitionStructure& ts, const Potential& f);
double topological_entropy(const TransitionStructure& ts, const Potential& f);

enum class CountMode {
    Geodesics,       // |R_T|: oriented closed geodesics, powers included
    PeriodicPoints,  // each geodesic weighted by its number of shift-periodic points
};

// log N(T) / T over closed geodesics of length < T.
double entropy_by_counting(const TransitionStructure& ts, const MetricGraph& graph, double horizon,
                           CountMode mode = CountMode::Geodesics, double cap = kDefaultEnumerationCap);

double livsic_period(const ClosedGeodesic& g, const Potential& f);

// Equal periods (within 1e-10) on every closed geodesic up to max_period.
bool is_cohomologous(const Potential& f1, const Potential& f2, const TransitionStructure& ts, std::size_t max_period);

} // namespace pmetric
