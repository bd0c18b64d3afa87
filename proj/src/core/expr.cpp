#include "expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace resilience {

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 6> kFunctions{{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"exp", Function::Exp},
    {"tanh", Function::Tanh},
    {"sqrt", Function::Sqrt},
    {"abs", Function::Abs},
}};

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
public:
    Parser(std::string_view src, Expression& out) : src_(src), out_(out) {}

    int parse() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("syntax error: empty expression", pos_);
        int root = parse_sum();
        skip_space();
        if (pos_ < src_.size())
            throw ParseError(std::string("syntax error: unexpected '") + src_[pos_] + "'", pos_);
        return root;
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                      src_[pos_] == '\r'))
            ++pos_;
    }

    char peek() {
        skip_space();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    int binary(Expression::Kind k, int l, int r) {
        Expression::Node n;
        n.kind = k;
        n.lhs = l;
        n.rhs = r;
        return out_.add_node(n);
    }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            int rhs = parse_product();
            lhs = binary(c == '+' ? Expression::Kind::Add : Expression::Kind::Subtract, lhs, rhs);
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            int rhs = parse_unary();
            lhs = binary(c == '*' ? Expression::Kind::Multiply : Expression::Kind::Divide, lhs, rhs);
        }
    }

    int parse_unary() {
        char c = peek();
        if (c == '-') {
            ++pos_;
            int operand = parse_unary();
            Expression::Node n;
            n.kind = Expression::Kind::Negate;
            n.lhs = operand;
            return out_.add_node(n);
        }
        if (c == '+') {
            ++pos_;
            return parse_unary();
        }
        return parse_power();
    }

    // Right-associative; the exponent may carry its own sign.
    int parse_power() {
        int base = parse_primary();
        if (peek() == '^') {
            ++pos_;
            int exponent = parse_unary();
            return binary(Expression::Kind::Power, base, exponent);
        }
        return base;
    }

    int parse_primary() {
        char c = peek();
        std::size_t start = pos_;
        if (c == '\0') throw ParseError("syntax error: unexpected end of input", pos_);
        if (c == '(') {
            ++pos_;
            int inner = parse_sum();
            if (peek() != ')') throw ParseError("syntax error: expected ')'", pos_);
            ++pos_;
            return inner;
        }
        if (is_digit(c) || c == '.') return parse_number();
        if (is_ident_start(c)) {
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            std::string name(src_.substr(start, pos_ - start));
            if (peek() == '(') {
                for (const auto& [fname, f] : kFunctions) {
                    if (fname == name) {
                        ++pos_;
                        int arg = parse_sum();
                        if (peek() != ')') throw ParseError("syntax error: expected ')'", pos_);
                        ++pos_;
                        Expression::Node n;
                        n.kind = Expression::Kind::Call;
                        n.function = f;
                        n.lhs = arg;
                        return out_.add_node(n);
                    }
                }
                throw ParseError("unknown function '" + name + "'", start);
            }
            const auto& syms = out_.symbols();
            for (std::size_t i = 0; i < syms.size(); ++i) {
                if (syms[i] == name) {
                    Expression::Node n;
                    n.kind = Expression::Kind::Symbol;
                    n.symbol = i;
                    return out_.add_node(n);
                }
            }
            if (name == "pi") {
                Expression::Node n;
                n.value = std::numbers::pi;
                return out_.add_node(n);
            }
            throw ParseError("unknown identifier '" + name + "'", start);
        }
        throw ParseError(std::string("syntax error: unexpected '") + c + "'", pos_);
    }

    int parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && is_digit(src_[pos_])) {
                while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc() || ptr != src_.data() + pos_)
            throw ParseError("syntax error: malformed number", start);
        Expression::Node n;
        n.value = v;
        return out_.add_node(n);
    }

    std::string_view src_;
    Expression& out_;
    std::size_t pos_ = 0;
};

double integer_power(double base, long long n) {
    bool negative = n < 0;
    unsigned long long m = negative ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
    double result = 1.0;
    if (m <= 16) {
        for (unsigned long long i = 0; i < m; ++i) result *= base;
    } else {
        double b = base;
        while (m) {
            if (m & 1ULL) result *= b;
            b *= b;
            m >>= 1ULL;
        }
    }
    if (negative) {
        if (result == 0.0) throw DomainError("division by zero in negative integer power");
        result = 1.0 / result;
    }
    return result;
}

}  // namespace

std::string_view function_name(Function f) {
    for (const auto& [name, fn] : kFunctions)
        if (fn == f) return name;
    return "?";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

int Expression::add_node(const Node& n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

Expression Expression::parse(std::string_view source, std::vector<std::string> symbols) {
    Expression e;
    e.symbols_ = std::move(symbols);
    Parser p(source, e);
    e.root_ = p.parse();
    return e;
}

Expression Expression::constant(double v, std::vector<std::string> symbols) {
    Expression e;
    e.symbols_ = std::move(symbols);
    Node n;
    n.value = v;
    e.root_ = e.add_node(n);
    return e;
}

double Expression::evaluate(std::span<const double> values) const {
    if (values.size() < symbols_.size()) throw DomainError("expression evaluated with too few symbol values");
    return eval_node(root_, values);
}

double Expression::eval_node(int idx, std::span<const double> values) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.kind) {
        case Kind::Constant:
            return n.value;
        case Kind::Symbol:
            return values[n.symbol];
        case Kind::Negate:
            return -eval_node(n.lhs, values);
        case Kind::Add:
            return eval_node(n.lhs, values) + eval_node(n.rhs, values);
        case Kind::Subtract:
            return eval_node(n.lhs, values) - eval_node(n.rhs, values);
        case Kind::Multiply:
            return eval_node(n.lhs, values) * eval_node(n.rhs, values);
        case Kind::Divide: {
            double num = eval_node(n.lhs, values);
            double den = eval_node(n.rhs, values);
            if (den == 0.0) throw DomainError("division by zero");
            return num / den;
        }
        case Kind::Power: {
            double b = eval_node(n.lhs, values);
            double p = eval_node(n.rhs, values);
            if (std::isfinite(p) && p == std::trunc(p) && std::fabs(p) <= 1e6)
                return integer_power(b, static_cast<long long>(p));
            if (b < 0.0) throw DomainError("negative base with non-integer exponent");
            if (b == 0.0 && p < 0.0) throw DomainError("division by zero in power");
            return std::pow(b, p);
        }
        case Kind::Call: {
            double a = eval_node(n.lhs, values);
            switch (n.function) {
                case Function::Sin: return std::sin(a);
                case Function::Cos: return std::cos(a);
                case Function::Exp: return std::exp(a);
                case Function::Tanh: return std::tanh(a);
                case Function::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of negative argument");
                    return std::sqrt(a);
                case Function::Abs: return std::fabs(a);
            }
        }
    }
    return 0.0;
}

std::string Expression::print() const {
    std::string out;
    if (root_ >= 0) print_node(root_, out);
    return out;
}

void Expression::print_node(int idx, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    auto bin = [&](const char* op) {
        out += '(';
        print_node(n.lhs, out);
        out += op;
        print_node(n.rhs, out);
        out += ')';
    };
    switch (n.kind) {
        case Kind::Constant:
            if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
                out += "(-";
                out += format_double(-n.value);
                out += ')';
            } else {
                out += format_double(n.value);
            }
            break;
        case Kind::Symbol:
            out += symbols_[n.symbol];
            break;
        case Kind::Negate:
            out += "(-";
            print_node(n.lhs, out);
            out += ')';
            break;
        case Kind::Add: bin("+"); break;
        case Kind::Subtract: bin("-"); break;
        case Kind::Multiply: bin("*"); break;
        case Kind::Divide: bin("/"); break;
        case Kind::Power: bin("^"); break;
        case Kind::Call:
            out += function_name(n.function);
            out += '(';
            print_node(n.lhs, out);
            out += ')';
            break;
    }
}

bool Expression::same_structure(const Expression& other) const {
    if (root_ < 0 || other.root_ < 0) return root_ == other.root_;
    return same_node(root_, other, other.root_);
}

bool Expression::same_node(int a, const Expression& other, int b) const {
    const Node& x = nodes_[static_cast<std::size_t>(a)];
    const Node& y = other.nodes_[static_cast<std::size_t>(b)];
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Kind::Constant: return x.value == y.value;
        case Kind::Symbol: return symbols_[x.symbol] == other.symbols_[y.symbol];
        case Kind::Negate: return same_node(x.lhs, other, y.lhs);
        case Kind::Call: return x.function == y.function && same_node(x.lhs, other, y.lhs);
        default: return same_node(x.lhs, other, y.lhs) && same_node(x.rhs, other, y.rhs);
    }
}

}  // namespace resilience
