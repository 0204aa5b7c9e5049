#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace idsm {

/// Closed-form scalar expression in x1, x2.
///
/// Grammar: numbers, variables x1 x2, binary + - * / ^ (^ binds tightest and
/// is right-associative), unary minus, parentheses, and the functions
/// sin cos exp ln abs. Example: "x1^2 + 0.1".
class Expression {
public:
    /// Throws ParseError on malformed input.
    static Expression parse(std::string_view text);

    double operator()(double x1, double x2) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace idsm
