#ifndef PVCAGG_DTREE_HPP
#define PVCAGG_DTREE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvcagg/algebra.hpp"
#include "pvcagg/canonical.hpp"
#include "pvcagg/distribution.hpp"

namespace pvcagg {

struct CompileOptions {
    /// Maximum number of nodes; 0 means unlimited.
    std::size_t node_budget = 0;
    /// Prune conditionals before compiling.
    bool prune = true;
    /// Prune again after every mutex substitution. Substitution often makes
    /// a bound decidable that was not before, so this is on by default.
    bool prune_after_substitution = true;
};

/// Decomposition tree. Nodes live in an arena; children always precede their
/// parent, so a forward pass over nodes() is a valid bottom-up order.
class DTree {
public:
    using NodeId = std::size_t;

    enum class Kind {
        Sum,            // independent sum, semiring or monoid
        Product,        // independent semiring product
        Scale,          // independent scalar action: children {scalar, module}
        Compare,        // independent comparison: children {lhs, rhs}
        Mutex,          // case split on one variable, one child per support value
        Variable,       // variable leaf, possibly raised to a power
        SemiringConst,  // s
        MonoidConst,    // m
        ScaledConst,    // s (x) m
        JointProduct,   // independent groups of a joint tree
        JointMutex,     // case split in a joint tree
        JointConst,     // constant tuple
        JointLift,      // a scalar subtree placed into one tuple slot
    };

    struct Node {
        Kind kind;
        std::vector<NodeId> children;
        std::optional<MonoidKind> monoid;  // Sum over a monoid, Scale, MonoidConst, ScaledConst
        Theta theta = Theta::Eq;           // Compare
        VarId var = 0;                     // Variable, Mutex, JointMutex
        std::uint32_t exponent = 1;        // Variable
        std::vector<std::uint64_t> branch_values;  // Mutex, JointMutex
        std::vector<double> branch_probs;          // Mutex, JointMutex
        std::uint64_t scalar = 0;          // SemiringConst, ScaledConst
        ExtNat value;                      // MonoidConst, ScaledConst
        std::vector<std::size_t> slots;    // joint nodes: sorted tuple positions covered
        Tuple tuple;                       // JointConst, in slot order
    };

    const Node& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<Node>& nodes() const { return nodes_; }
    NodeId root() const { return root_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t count(Kind kind) const;
    /// Number of tuple positions; 0 for a scalar tree.
    std::size_t width() const { return width_; }

    const VarIndex& index() const { return index_; }
    SemiringKind semiring() const { return sk_; }
    const Distribution& variable_distribution(VarId x) const { return dists_.at(x); }

private:
    friend class Compiler;

    std::vector<Node> nodes_;
    NodeId root_ = 0;
    std::size_t width_ = 0;
    VarIndex index_;
    SemiringKind sk_ = SemiringKind::Boolean;
    std::vector<Distribution> dists_;  // by VarId
};

DTree compile(const Operand& expr, const VarDistributions& dists, SemiringKind sk, const CompileOptions& options = {});
/// One tree over several expressions sharing a variable universe; its
/// distribution ranges over tuples with one position per expression.
DTree compile_joint(const std::vector<Operand>& exprs, const VarDistributions& dists, SemiringKind sk,
                    const CompileOptions& options = {});

Distribution distribution(const DTree& d);
JointDistribution joint_distribution(const DTree& d);

/// Evaluates the tree under a valuation (mutex nodes select the branch of
/// the variable's value). Scalar trees only.
ExtNat evaluate(const DTree& d, const Valuation& nu);
/// Independence and mutex invariants; returns one message per violation.
std::vector<std::string> validate(const DTree& d);

std::string dump(const DTree& d);
std::string dump_dot(const DTree& d);

// --- compilation steps, exposed for inspection -------------------------------

enum class SplitRule { Sum, Product, Scale, Compare };

/// Two variable-disjoint parts recombining to `f` under the rule's operator.
std::optional<std::pair<Form, Form>> partition_independent(const Form& f, SplitRule rule, SemiringKind sk);
std::optional<std::pair<Operand, Operand>> partition_independent(const Operand& expr, SplitRule rule,
                                                                 SemiringKind sk);

/// Variable with most occurrences, ties to the smallest name. Throws NoVariables.
VarId choose_branch_variable(const Form& f);
std::string choose_branch_variable(const Operand& expr, SemiringKind sk);

/// Rewrites every conditional with interval reasoning: terms that cannot
/// influence the comparison are dropped and decided comparisons become 0 or 1.
Form prune(const Form& f, SemiringKind sk);
Operand prune(const Operand& expr, SemiringKind sk);

/// MIN/MAX expressions over naturals only depend on whether scalars are zero,
/// so they can be evaluated over Boolean variables with P[false] = P[0].
/// Accepts a MIN/MAX semimodule expression or a comparison of such
/// expressions and constants; throws WrongMonoid otherwise.
std::pair<Operand, VarDistributions> reduce_to_boolean(const Operand& expr, const VarDistributions& dists);

}  // namespace pvcagg

#endif  // PVCAGG_DTREE_HPP
