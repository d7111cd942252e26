#pragma once

#include "motint/ball.hpp"
#include "motint/pas.hpp"

#include <cstdint>
#include <memory>
#include <variant>

namespace motint {

enum class Tri { True, False, Unknown };

Tri tri_not(Tri a);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);
const char* tri_name(Tri t);

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Atom-evaluation budget: MOTINT_BUDGET if set, else 10^9.
std::uint64_t default_budget();

struct EvalConfig {
    int N = 1;
    int B_vg = -1;  // -1 means 4N
    bool certify = true;
    std::uint64_t budget = default_budget();
    unsigned threads = 0;  // 0: hardware concurrency

    EvalConfig() = default;
    explicit EvalConfig(int n) : N(n) {}
    int vg_bound() const { return B_vg < 0 ? 4 * N : B_vg; }
};

/// A valuation-ring value is a ball center + pi^radius * (ring); radius kExact
/// marks an exact element.
struct VrValue {
    Element center;
    int radius = kExact;
};

using Value = std::variant<VrValue, long, ResidueElement>;

Value vr_value(const TruncatedElement& x);
Value vr_exact(const Element& x);

using Assignment = std::map<std::string, Value>;

class CompiledFormula;

/// A formula compiled for one backend with a fixed order of free variables.
/// Valuation-ring inputs are balls; TRUE means "for every point of the
/// balls", FALSE means "for no point", in the untruncated ring.
class Evaluator {
public:
    Evaluator(const FormulaPtr& f, const BackendSpec& b, const std::vector<std::pair<std::string, Sort>>& free,
              const RingRegistry* reg = nullptr);
    ~Evaluator();
    Evaluator(Evaluator&&) noexcept;

    const BackendSpec& backend() const { return backend_; }
    const std::vector<std::pair<std::string, Sort>>& free() const { return free_; }

    /// Values ordered as free().
    Tri eval(const std::vector<Value>& vals, const EvalConfig& cfg) const;
    /// Exact truth in the finite ring (Z/p^N or F_p[t]/t^N).
    bool eval_level(const std::vector<Value>& vals, const EvalConfig& cfg) const;

    /// Whether the product of balls given by the valuation-ring free variables
    /// contains a point of the defined set: TRUE (certified), FALSE, or Unknown.
    Tri ball_meets(const std::vector<Element>& centers, const std::vector<int>& radii, const EvalConfig& cfg) const;

    /// Rough count of atom evaluations for one call at precision N.
    double cost_estimate(const EvalConfig& cfg) const;

private:
    BackendSpec backend_;
    std::vector<std::pair<std::string, Sort>> free_;
    std::unique_ptr<CompiledFormula> c_;
};

Tri eval_at_level(const FormulaPtr& f, const BackendSpec& b, const EvalConfig& cfg, const Assignment& a,
                  const RingRegistry* reg = nullptr);
bool eval_level_truth(const FormulaPtr& f, const BackendSpec& b, const EvalConfig& cfg, const Assignment& a,
                      const RingRegistry* reg = nullptr);

struct CountResult {
    Integer certain_true, unknown, certain_false;
};

/// All free variables must be of sort vr; counts balls of radius N.
CountResult count_satisfying(const FormulaPtr& f, const BackendSpec& b, const EvalConfig& cfg,
                             const RingRegistry* reg = nullptr);

struct StabilizeResult {
    Tri verdict = Tri::Unknown;
    std::vector<std::pair<int, Tri>> history;
};

StabilizeResult stabilize_sentence(const FormulaPtr& f, const BackendSpec& b, const std::vector<int>& schedule,
                                   const RingRegistry* reg = nullptr, const EvalConfig& base = EvalConfig());

struct AkeRow {
    std::uint32_t p;
    Tri padic, power_series;
    enum class Status { AGREE, DISAGREE, UNDECIDED } status;
};

struct AkeReport {
    std::vector<AkeRow> rows;
    int agreements = 0, disagreements = 0, undecided = 0;
};

AkeReport ake_compare(const FormulaPtr& f, const std::vector<std::uint32_t>& primes, const std::vector<int>& schedule,
                      const RingRegistry* reg = nullptr);

/// Runs fn(i) for i in [0, n) on a thread pool; per-index results are summed
/// by the caller, so the outcome does not depend on scheduling.
void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t lo, std::uint64_t hi)>& fn);

}  // namespace motint
