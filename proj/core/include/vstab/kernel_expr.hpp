#pragma once

#include <complex>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vstab/errors.hpp"

namespace vstab {

enum class VarId { X, Tau, Y };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class CallFn { Sin, Cos, Exp, Abs, Re, Im, Conj };

/// Immutable expression tree over complex literals, the variables
/// x / tau / y, + - * /, unary negation and the function set above.
///
/// Literal nodes hold a purely real or purely imaginary value (the forms
/// the grammar can produce: `2.5` and `2.5i`); general complex constants
/// are built with arithmetic nodes.
struct ExprNode;
using ExprPtr = std::unique_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Literal, Variable, Negate, Binary, Call };

    Kind kind;
    std::complex<double> literal{};
    VarId var{};
    BinaryOp op{};
    CallFn fn{};
    ExprPtr lhs; // Negate/Call operand; Binary left
    ExprPtr rhs; // Binary right
};

ExprPtr make_literal(std::complex<double> value);
ExprPtr make_variable(VarId var);
ExprPtr make_negate(ExprPtr operand);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_call(CallFn fn, ExprPtr operand);

bool structurally_equal(const ExprNode& lhs, const ExprNode& rhs);

/// A parsed kernel V(x, tau, y). Wraps the AST together with a flattened
/// postfix program so bulk evaluation does not walk pointers.
class KernelExpr {
public:
    explicit KernelExpr(ExprPtr root);

    const ExprNode& root() const { return *root_; }

    /// Minimal-parentheses text form; reparsing yields a structurally
    /// identical tree.
    std::string pretty() const;

    bool depends_on(VarId var) const;

    /// One-off evaluation. Throws EvalError on division by zero or any
    /// non-finite intermediate, DomainError on non-finite arguments.
    std::complex<double> eval(double x, double tau,
                              std::complex<double> y) const;

    friend bool structurally_equal(const KernelExpr& lhs,
                                   const KernelExpr& rhs) {
        return structurally_equal(*lhs.root_, *rhs.root_);
    }

private:
    friend class KernelEvaluator;

    enum class OpCode : unsigned char {
        PushLit, PushX, PushTau, PushY,
        Neg, Add, Sub, Mul, Div,
        Sin, Cos, Exp, Abs, Re, Im, Conj,
    };
    struct Instr {
        OpCode op;
        std::complex<double> literal{};
    };

    std::shared_ptr<const ExprNode> root_;
    std::vector<Instr> program_;
    std::size_t stack_need_ = 0;
};

/// Reusable evaluation scratch for hot loops (quadrature sums evaluate the
/// kernel millions of times). One instance per thread.
class KernelEvaluator {
public:
    explicit KernelEvaluator(const KernelExpr& kernel);

    std::complex<double> operator()(double x, double tau,
                                    std::complex<double> y);

private:
    const KernelExpr* kernel_;
    std::vector<std::complex<double>> stack_;
};

/// Recursive-descent parse of the kernel grammar:
///
///   expr    := term (('+' | '-') term)*
///   term    := factor (('*' | '/') factor)*
///   factor  := '-' factor | primary
///   primary := NUMBER | VARIABLE | FUNCTION '(' expr ')' | '(' expr ')'
///
/// NUMBER is a decimal with optional exponent and optional trailing 'i';
/// VARIABLE is x, tau or y; FUNCTION is sin, cos, exp, abs, re, im or conj.
/// Throws ParseError carrying the byte offset and the expected-token set.
KernelExpr parse_kernel(std::string_view src);

} // namespace vstab
