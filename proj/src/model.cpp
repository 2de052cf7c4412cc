#include "pdm/model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pdm {

ParseError::ParseError(std::size_t line, const std::string &message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::optional<std::size_t> ProductDataModel::find_operation(std::string_view id) const {
    for (std::size_t i = 0; i < operations.size(); ++i) {
        if (operations[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

bool ProductDataModel::has_element(std::string_view name) const {
    return std::find(elements.begin(), elements.end(), name) != elements.end();
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') {
            ++i;
        }
        if (i > start) {
            tokens.push_back(s.substr(start, i - start));
        }
    }
    return tokens;
}

double parse_real(std::string_view text, std::size_t line, std::string_view key) {
    double value = 0.0;
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(line, "invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
    }
    return value;
}

void note_element(ProductDataModel &model, std::set<std::string, std::less<>> &seen, const std::string &name) {
    if (seen.insert(name).second) {
        model.elements.push_back(name);
    }
}

Operation parse_operation(std::string_view body, std::size_t line) {
    Operation op;
    std::map<std::string, std::string_view, std::less<>> fields;
    for (const auto token : split_whitespace(body)) {
        const auto eq = token.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw ParseError(line, "expected key=value, got '" + std::string(token) + "'");
        }
        std::string key(token.substr(0, eq));
        if (!fields.emplace(key, token.substr(eq + 1)).second) {
            throw ParseError(line, "duplicate field '" + key + "'");
        }
    }
    static constexpr std::string_view required[] = {"id", "out", "in", "cost", "time", "prob"};
    for (const auto key : required) {
        if (!fields.contains(key)) {
            throw ParseError(line, "missing required field '" + std::string(key) + "'");
        }
    }
    for (const auto &[key, value] : fields) {
        if (std::find(std::begin(required), std::end(required), key) == std::end(required) && key != "quality") {
            throw ParseError(line, "unknown field '" + key + "'");
        }
    }

    op.id = std::string(fields.at("id"));
    op.output = std::string(fields.at("out"));
    if (op.id.empty() || op.output.empty()) {
        throw ParseError(line, "empty id or output");
    }
    const auto inputs = fields.at("in");
    if (inputs != "-") {
        for (const auto name : split(inputs, ',')) {
            if (name.empty()) {
                throw ParseError(line, "empty input element name");
            }
            std::string element(name);
            if (std::find(op.inputs.begin(), op.inputs.end(), element) != op.inputs.end()) {
                throw ParseError(line, "duplicate input '" + element + "'");
            }
            op.inputs.push_back(std::move(element));
        }
    }
    if (std::find(op.inputs.begin(), op.inputs.end(), op.output) != op.inputs.end()) {
        throw ParseError(line, "operation " + op.id + " has its output " + op.output + " among its inputs");
    }
    op.cost = parse_real(fields.at("cost"), line, "cost");
    op.time = parse_real(fields.at("time"), line, "time");
    op.fail_prob = parse_real(fields.at("prob"), line, "prob");
    return op;
}

} // namespace

ProductDataModel parse_pdm(std::string_view text) {
    ProductDataModel model;
    std::set<std::string, std::less<>> seen_elements;
    std::set<std::string, std::less<>> seen_ops;
    std::optional<std::size_t> root_line;

    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
            raw = raw.substr(0, hash);
        }
        const auto line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw ParseError(line_no, "expected 'root:' or 'op:' directive");
        }
        const auto directive = trim(line.substr(0, colon));
        const auto body = trim(line.substr(colon + 1));
        if (directive == "root") {
            if (root_line) {
                throw ParseError(line_no, "duplicate root declaration");
            }
            if (body.empty() || body.find_first_of(" \t") != std::string_view::npos) {
                throw ParseError(line_no, "root must name a single element");
            }
            model.root = std::string(body);
            root_line = line_no;
        } else if (directive == "op") {
            auto op = parse_operation(body, line_no);
            if (!seen_ops.insert(op.id).second) {
                throw ParseError(line_no, "duplicate operation id '" + op.id + "'");
            }
            note_element(model, seen_elements, op.output);
            for (const auto &input : op.inputs) {
                note_element(model, seen_elements, input);
            }
            model.operations.push_back(std::move(op));
        } else {
            throw ParseError(line_no, "unknown directive '" + std::string(directive) + "'");
        }
    }

    if (!root_line) {
        throw ParseError(line_no, "missing 'root:' declaration");
    }
    if (!seen_elements.contains(model.root)) {
        throw ParseError(*root_line, "unknown root element '" + model.root + "'");
    }
    return model;
}

namespace {

std::string format_real(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

} // namespace

std::string serialize_pdm(const ProductDataModel &model) {
    std::ostringstream out;
    out << "root: " << model.root << '\n';
    for (const auto &op : model.operations) {
        out << "op: id=" << op.id << " out=" << op.output << " in=";
        if (op.inputs.empty()) {
            out << '-';
        }
        for (std::size_t i = 0; i < op.inputs.size(); ++i) {
            out << (i ? "," : "") << op.inputs[i];
        }
        out << " cost=" << format_real(op.cost) << " time=" << format_real(op.time)
            << " prob=" << format_real(op.fail_prob) << '\n';
    }
    return out.str();
}

ProductDataModel load_pdm_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open model file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_pdm(buffer.str());
}

std::vector<Violation> validate(const ProductDataModel &model) {
    std::vector<Violation> violations;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < model.elements.size(); ++i) {
        if (model.elements[i].empty()) {
            violations.push_back({"element #" + std::to_string(i), "empty element name"});
        }
        if (!index.emplace(model.elements[i], i).second) {
            violations.push_back({model.elements[i], "duplicate element"});
        }
    }

    std::set<std::string> op_ids;
    std::vector<std::vector<std::size_t>> producers(model.elements.size());
    for (std::size_t i = 0; i < model.operations.size(); ++i) {
        const auto &op = model.operations[i];
        if (!op_ids.insert(op.id).second) {
            violations.push_back({op.id, "duplicate operation id"});
        }
        if (!index.contains(op.output)) {
            violations.push_back({op.id, "output element " + op.output + " is not declared"});
        } else {
            producers[index.at(op.output)].push_back(i);
        }
        for (const auto &input : op.inputs) {
            if (!index.contains(input)) {
                violations.push_back({op.id, "input element " + input + " is not declared"});
            }
        }
        if (std::find(op.inputs.begin(), op.inputs.end(), op.output) != op.inputs.end()) {
            violations.push_back({op.id, "output element is one of its own inputs"});
        }
        if (!(op.cost >= 0.0)) {
            violations.push_back({op.id, "cost must be non-negative"});
        }
        if (!(op.time >= 0.0)) {
            violations.push_back({op.id, "time must be non-negative"});
        }
        if (!(op.fail_prob >= 0.0 && op.fail_prob <= 1.0)) {
            violations.push_back({op.id, "failure probability must lie in [0, 1]"});
        }
        if (op.artificial && (op.cost != 0.0 || op.time != 0.0 || op.fail_prob != 0.0)) {
            violations.push_back({op.id, "artificial operation must have zero attributes"});
        }
    }

    if (!index.contains(model.root)) {
        violations.push_back({model.root, "root element is not declared"});
    } else if (producers[index.at(model.root)].empty()) {
        violations.push_back({model.root, "root element has no producing operation"});
    }
    for (std::size_t e = 0; e < model.elements.size(); ++e) {
        if (producers[e].empty() && model.elements[e] != model.root) {
            violations.push_back({model.elements[e], "element has no producing operation"});
        }
    }

    // Kahn's algorithm over element -> element dependencies (input before output).
    const std::size_t n = model.elements.size();
    std::vector<std::vector<std::size_t>> successors(n);
    std::vector<std::size_t> indegree(n, 0);
    for (const auto &op : model.operations) {
        if (!index.contains(op.output)) {
            continue;
        }
        const auto out = index.at(op.output);
        for (const auto &input : op.inputs) {
            if (index.contains(input) && input != op.output) {
                successors[index.at(input)].push_back(out);
                ++indegree[out];
            }
        }
    }
    std::vector<std::size_t> ready;
    for (std::size_t e = 0; e < n; ++e) {
        if (indegree[e] == 0) {
            ready.push_back(e);
        }
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        const auto e = ready.back();
        ready.pop_back();
        ++visited;
        for (const auto next : successors[e]) {
            if (--indegree[next] == 0) {
                ready.push_back(next);
            }
        }
    }
    if (visited != n) {
        std::string members;
        for (std::size_t e = 0; e < n; ++e) {
            if (indegree[e] > 0) {
                members += (members.empty() ? "" : ",") + model.elements[e];
            }
        }
        violations.push_back({members, "element dependencies contain a cycle"});
    }
    return violations;
}

std::optional<OpIndex> NormalizedGraph::find_operation(std::string_view id) const {
    for (OpIndex i = 0; i < operations_.size(); ++i) {
        if (operations_[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<ElementIndex> NormalizedGraph::find_element(std::string_view name) const {
    for (ElementIndex i = 0; i < elements_.size(); ++i) {
        if (elements_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::vector<Operation> NormalizedGraph::collapse() const {
    std::vector<ElementIndex> resolved(elements_.size());
    for (ElementIndex e = 0; e < elements_.size(); ++e) {
        resolved[e] = e;
    }
    for (OpIndex i = real_count_; i < operations_.size(); ++i) {
        resolved[operations_[i].inputs.front()] = operations_[i].output;
    }
    std::vector<Operation> result;
    result.reserve(real_count_);
    for (OpIndex i = 0; i < real_count_; ++i) {
        const auto &op = operations_[i];
        Operation out{op.id, elements_[resolved[op.output]], {}, op.cost, op.time, op.fail_prob, false};
        for (const auto input : op.inputs) {
            out.inputs.push_back(elements_[input]);
        }
        result.push_back(std::move(out));
    }
    return result;
}

NormalizedGraph normalize(const ProductDataModel &model) {
    NormalizedGraph graph;
    graph.elements_ = model.elements;
    graph.original_elements_ = model.elements.size();

    std::unordered_map<std::string, ElementIndex> index;
    for (ElementIndex e = 0; e < model.elements.size(); ++e) {
        index.emplace(model.elements[e], e);
    }
    const auto lookup = [&](const std::string &name) {
        const auto it = index.find(name);
        if (it == index.end()) {
            throw Error("element '" + name + "' is not declared");
        }
        return it->second;
    };
    graph.root_ = lookup(model.root);

    std::set<std::pair<ElementIndex, ElementIndex>> pairs;
    std::vector<GraphOperation> artificial;
    for (OpIndex i = 0; i < model.operations.size(); ++i) {
        const auto &src = model.operations[i];
        GraphOperation op{src.id, lookup(src.output), {}, src.cost, src.time, src.fail_prob, src.artificial, i};
        for (const auto &input : src.inputs) {
            op.inputs.push_back(lookup(input));
        }
        const bool parallel = std::any_of(op.inputs.begin(), op.inputs.end(),
                                          [&](ElementIndex u) { return pairs.contains({u, op.output}); });
        if (parallel) {
            const auto n = artificial.size() + 1;
            const ElementIndex dummy = graph.elements_.size();
            graph.elements_.push_back("_d" + std::to_string(n));
            artificial.push_back({"_a" + std::to_string(n), op.output, {dummy}, 0.0, 0.0, 0.0, true, i});
            op.output = dummy;
        } else {
            for (const auto u : op.inputs) {
                pairs.emplace(u, op.output);
            }
        }
        graph.operations_.push_back(std::move(op));
    }
    graph.real_count_ = graph.operations_.size();
    for (auto &op : artificial) {
        graph.operations_.push_back(std::move(op));
    }

    graph.producers_.assign(graph.elements_.size(), {});
    graph.consumers_.assign(graph.elements_.size(), {});
    for (OpIndex i = 0; i < graph.operations_.size(); ++i) {
        const auto &op = graph.operations_[i];
        graph.producers_[op.output].push_back(i);
        for (const auto u : op.inputs) {
            graph.consumers_[u].push_back(i);
            graph.edges_.push_back({u, op.output, i});
        }
    }
    return graph;
}

} // namespace pdm
