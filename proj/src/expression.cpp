#include "idsm/expression.hpp"

#include "idsm/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace idsm {

struct Expression::Node {
    enum class Kind { number, x1, x2, neg, add, sub, mul, div, pow, sin, cos, exp, ln, abs } kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x1, double x2) const {
        switch (kind) {
            case Kind::number: return value;
            case Kind::x1: return x1;
            case Kind::x2: return x2;
            case Kind::neg: return -lhs->eval(x1, x2);
            case Kind::add: return lhs->eval(x1, x2) + rhs->eval(x1, x2);
            case Kind::sub: return lhs->eval(x1, x2) - rhs->eval(x1, x2);
            case Kind::mul: return lhs->eval(x1, x2) * rhs->eval(x1, x2);
            case Kind::div: return lhs->eval(x1, x2) / rhs->eval(x1, x2);
            case Kind::pow: {
                const double e = rhs->eval(x1, x2);
                const double b = lhs->eval(x1, x2);
                // Integer exponents via repeated multiplication keep x^2 exact.
                if (e == std::floor(e) && std::abs(e) <= 16) {
                    double r = 1.0;
                    for (int i = 0; i < static_cast<int>(std::abs(e)); ++i) r *= b;
                    return e < 0 ? 1.0 / r : r;
                }
                return std::pow(b, e);
            }
            case Kind::sin: return std::sin(lhs->eval(x1, x2));
            case Kind::cos: return std::cos(lhs->eval(x1, x2));
            case Kind::exp: return std::exp(lhs->eval(x1, x2));
            case Kind::ln: return std::log(lhs->eval(x1, x2));
            case Kind::abs: return std::abs(lhs->eval(x1, x2));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        auto e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression: " + msg + " at position " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Kind::add, lhs, term());
            else if (eat('-')) lhs = make(Kind::sub, lhs, term());
            else return lhs;
        }
    }
    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Kind::mul, lhs, unary());
            else if (eat('/')) lhs = make(Kind::div, lhs, unary());
            else return lhs;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Kind::neg, unary());
        if (eat('+')) return unary();
        return power();
    }
    NodePtr power() {
        auto base = primary();
        if (eat('^')) return make(Kind::pow, base, unary());
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (eat('(')) {
            auto e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const auto* begin = s_.data() + pos_;
            auto [ptr, ec] = std::from_chars(begin, s_.data() + s_.size(), v);
            if (ec != std::errc()) fail("bad number");
            pos_ += static_cast<std::size_t>(ptr - begin);
            return make(Kind::number, nullptr, nullptr, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x1") return make(Kind::x1);
            if (id == "x2") return make(Kind::x2);
            Kind k;
            if (id == "sin") k = Kind::sin;
            else if (id == "cos") k = Kind::cos;
            else if (id == "exp") k = Kind::exp;
            else if (id == "ln") k = Kind::ln;
            else if (id == "abs") k = Kind::abs;
            else {
                pos_ = start;
                fail("unknown identifier '" + std::string(id) + "'");
            }
            if (!eat('(')) fail("expected '(' after function name");
            auto arg = expr();
            if (!eat(')')) fail("expected ')'");
            return make(k, arg);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.text_ = trim(text);
    if (e.text_.empty()) throw ParseError("expression: empty");
    e.root_ = Parser(e.text_).parse();
    return e;
}

double Expression::operator()(double x1, double x2) const { return root_->eval(x1, x2); }

}  // namespace idsm
