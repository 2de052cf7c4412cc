#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdm {

using ElementId = std::string;
using ElementIndex = std::size_t;
using OpIndex = std::size_t;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string &message);

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

struct Operation {
    std::string id;
    ElementId output;
    std::vector<ElementId> inputs;
    double cost = 0.0;
    double time = 0.0;
    double fail_prob = 0.0;
    bool artificial = false;

    bool operator==(const Operation &) const = default;
};

/// Declarative process description. Operation order is the canonical
/// tie-break order used by every downstream component.
struct ProductDataModel {
    std::vector<ElementId> elements;
    std::vector<Operation> operations;
    ElementId root;

    std::optional<std::size_t> find_operation(std::string_view id) const;
    bool has_element(std::string_view name) const;

    bool operator==(const ProductDataModel &) const = default;
};

/// Parses the line-oriented PDM format:
///
///     # comment
///     root: A
///     op: id=Op01 out=A in=B,C,D cost=5 time=1 prob=0.05
///
/// `in=-` denotes a zero-input (leaf) operation. An optional `quality=` key is
/// accepted and ignored.
ProductDataModel parse_pdm(std::string_view text);

std::string serialize_pdm(const ProductDataModel &model);

ProductDataModel load_pdm_file(const std::string &path);

struct Violation {
    std::string subject;
    std::string message;
};

/// Reports every structural problem; an empty result means the model is valid.
std::vector<Violation> validate(const ProductDataModel &model);

struct Edge {
    ElementIndex source;
    ElementIndex target;
    OpIndex op;
};

struct GraphOperation {
    std::string id;
    ElementIndex output;
    std::vector<ElementIndex> inputs;
    double cost = 0.0;
    double time = 0.0;
    double fail_prob = 0.0;
    bool artificial = false;
    /// For artificial operations, the rerouted original operation; otherwise the operation itself.
    OpIndex origin = 0;
};

/// Directed simple graph over data elements. Original operations keep their
/// model index; artificial operations are appended after them.
class NormalizedGraph {
  public:
    const std::vector<std::string> &elements() const { return elements_; }
    const std::vector<GraphOperation> &operations() const { return operations_; }
    const std::vector<Edge> &edges() const { return edges_; }

    std::size_t element_count() const { return elements_.size(); }
    std::size_t operation_count() const { return operations_.size(); }
    std::size_t real_operation_count() const { return real_count_; }
    std::size_t dummy_count() const { return elements_.size() - original_elements_; }

    ElementIndex root() const { return root_; }
    const GraphOperation &op(OpIndex i) const { return operations_[i]; }
    const std::string &element_name(ElementIndex e) const { return elements_[e]; }
    bool is_dummy(ElementIndex e) const { return e >= original_elements_; }

    const std::vector<OpIndex> &producers(ElementIndex e) const { return producers_[e]; }
    const std::vector<OpIndex> &consumers(ElementIndex e) const { return consumers_[e]; }

    std::optional<OpIndex> find_operation(std::string_view id) const;
    std::optional<ElementIndex> find_element(std::string_view name) const;

    /// Hyperedges with dummy vertices folded back: for each original operation,
    /// its effective output element name and input names.
    std::vector<Operation> collapse() const;

  private:
    friend NormalizedGraph normalize(const ProductDataModel &model);

    std::vector<std::string> elements_;
    std::vector<GraphOperation> operations_;
    std::vector<Edge> edges_;
    std::vector<std::vector<OpIndex>> producers_;
    std::vector<std::vector<OpIndex>> consumers_;
    std::size_t real_count_ = 0;
    std::size_t original_elements_ = 0;
    ElementIndex root_ = 0;
};

/// Inserts dummy vertices `_d1, _d2, ...` so that every ordered element pair is
/// joined by at most one edge. Every operation after the first (in file order)
/// that would duplicate an existing pair is rerouted to a fresh dummy, and an
/// artificial zero-attribute operation `_a<n>` maps that dummy to the original
/// output.
NormalizedGraph normalize(const ProductDataModel &model);

} // namespace pdm
