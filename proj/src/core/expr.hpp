#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resilience {

enum class Function { Sin, Cos, Exp, Tanh, Sqrt, Abs };

// Immutable arithmetic expression over a fixed, ordered symbol table.
// Evaluation takes the symbol values in table order.
class Expression {
public:
    enum class Kind { Constant, Symbol, Negate, Add, Subtract, Multiply, Divide, Power, Call };

    struct Node {
        Kind kind = Kind::Constant;
        double value = 0.0;
        std::size_t symbol = 0;
        Function function = Function::Sin;
        int lhs = -1;
        int rhs = -1;
    };

    Expression() = default;

    static Expression parse(std::string_view source, std::vector<std::string> symbols);
    static Expression constant(double v, std::vector<std::string> symbols = {});

    double evaluate(std::span<const double> values) const;

    // Fully parenthesized; numbers in shortest round-trip form.
    std::string print() const;

    bool same_structure(const Expression& other) const;

    const std::vector<std::string>& symbols() const noexcept { return symbols_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    int root() const noexcept { return root_; }

    // Builders for programmatic construction (used by property tests).
    int add_node(const Node& n);
    void set_root(int r) { root_ = r; }
    void set_symbols(std::vector<std::string> s) { symbols_ = std::move(s); }

private:
    double eval_node(int idx, std::span<const double> values) const;
    void print_node(int idx, std::string& out) const;
    bool same_node(int a, const Expression& other, int b) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<std::string> symbols_;
};

std::string_view function_name(Function f);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

}  // namespace resilience
