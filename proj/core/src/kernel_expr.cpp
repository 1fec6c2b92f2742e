#include "vstab/kernel_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "vstab/numeric.hpp"

namespace vstab {

namespace {

bool component_ok(double v) {
    // Finite, nonnegative, and not -0: exactly the values the grammar can
    // produce, which keeps pretty-print/parse round trips structural.
    return std::isfinite(v) && v >= 0.0 && !(v == 0.0 && std::signbit(v));
}

} // namespace

ExprPtr make_literal(std::complex<double> value) {
    if (!component_ok(value.real()) || !component_ok(value.imag()))
        throw DomainError("literal components must be finite and nonnegative; "
                          "negate or combine literals with operators instead");
    if (value.real() != 0.0 && value.imag() != 0.0)
        throw DomainError("literals are purely real or purely imaginary; "
                          "build general complex constants with '+'");
    auto node = std::make_unique<ExprNode>();
    node->kind = ExprNode::Kind::Literal;
    node->literal = value;
    return node;
}

ExprPtr make_variable(VarId var) {
    auto node = std::make_unique<ExprNode>();
    node->kind = ExprNode::Kind::Variable;
    node->var = var;
    return node;
}

ExprPtr make_negate(ExprPtr operand) {
    auto node = std::make_unique<ExprNode>();
    node->kind = ExprNode::Kind::Negate;
    node->lhs = std::move(operand);
    return node;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto node = std::make_unique<ExprNode>();
    node->kind = ExprNode::Kind::Binary;
    node->op = op;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
}

ExprPtr make_call(CallFn fn, ExprPtr operand) {
    auto node = std::make_unique<ExprNode>();
    node->kind = ExprNode::Kind::Call;
    node->fn = fn;
    node->lhs = std::move(operand);
    return node;
}

bool structurally_equal(const ExprNode& lhs, const ExprNode& rhs) {
    if (lhs.kind != rhs.kind)
        return false;
    switch (lhs.kind) {
    case ExprNode::Kind::Literal:
        return lhs.literal == rhs.literal;
    case ExprNode::Kind::Variable:
        return lhs.var == rhs.var;
    case ExprNode::Kind::Negate:
        return structurally_equal(*lhs.lhs, *rhs.lhs);
    case ExprNode::Kind::Binary:
        return lhs.op == rhs.op && structurally_equal(*lhs.lhs, *rhs.lhs) &&
               structurally_equal(*lhs.rhs, *rhs.rhs);
    case ExprNode::Kind::Call:
        return lhs.fn == rhs.fn && structurally_equal(*lhs.lhs, *rhs.lhs);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, End };
    Kind kind;
    std::size_t offset;
    std::string_view text;
    double value = 0.0;
    bool imaginary = false;
};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i])))
                ++i;
            if (i < src.size() && src[i] == '.') {
                ++i;
                if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i])))
                    throw ParseError(i, {"digit"});
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i])))
                    ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                // Exponent only when digits actually follow; otherwise the
                // 'e' starts an identifier (e.g. "2exp(y)" errors cleanly).
                std::size_t j = i + 1;
                if (j < src.size() && (src[j] == '+' || src[j] == '-'))
                    ++j;
                if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
                    i = j;
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i])))
                        ++i;
                }
            }
            bool imaginary = false;
            if (i < src.size() && src[i] == 'i' &&
                (i + 1 >= src.size() || !ident_char(src[i + 1]))) {
                imaginary = true;
                ++i;
            }
            std::string_view text = src.substr(start, i - start);
            std::string_view digits = text.substr(0, text.size() - (imaginary ? 1 : 0));
            double value = 0.0;
            std::from_chars(digits.data(), digits.data() + digits.size(), value);
            if (!std::isfinite(value))
                throw ParseError(start, {"representable number"});
            tokens.push_back({Token::Kind::Number, start, text, value, imaginary});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() && ident_char(src[i]))
                ++i;
            tokens.push_back({Token::Kind::Ident, start, src.substr(start, i - start)});
            continue;
        }
        Token::Kind kind;
        switch (c) {
        case '+': kind = Token::Kind::Plus; break;
        case '-': kind = Token::Kind::Minus; break;
        case '*': kind = Token::Kind::Star; break;
        case '/': kind = Token::Kind::Slash; break;
        case '(': kind = Token::Kind::LParen; break;
        case ')': kind = Token::Kind::RParen; break;
        default:
            throw ParseError(start, {"number", "identifier", "'+'", "'-'", "'*'",
                                     "'/'", "'('", "')'"});
        }
        tokens.push_back({kind, start, src.substr(start, 1)});
        ++i;
    }
    tokens.push_back({Token::Kind::End, src.size(), {}});
    return tokens;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

class Parser {
public:
    explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

    ExprPtr parse() {
        ExprPtr root = expression();
        if (peek().kind != Token::Kind::End)
            throw ParseError(peek().offset,
                             {"'+'", "'-'", "'*'", "'/'", "end of input"});
        return root;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }

    ExprPtr expression() {
        ExprPtr lhs = term();
        while (peek().kind == Token::Kind::Plus ||
               peek().kind == Token::Kind::Minus) {
            BinaryOp op = advance().kind == Token::Kind::Plus ? BinaryOp::Add
                                                              : BinaryOp::Sub;
            lhs = make_binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        while (peek().kind == Token::Kind::Star ||
               peek().kind == Token::Kind::Slash) {
            BinaryOp op = advance().kind == Token::Kind::Star ? BinaryOp::Mul
                                                              : BinaryOp::Div;
            lhs = make_binary(op, std::move(lhs), factor());
        }
        return lhs;
    }

    ExprPtr factor() {
        if (peek().kind == Token::Kind::Minus) {
            advance();
            return make_negate(factor());
        }
        return primary();
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
        case Token::Kind::Number: {
            advance();
            return make_literal(t.imaginary
                                    ? std::complex<double>(0.0, t.value)
                                    : std::complex<double>(t.value, 0.0));
        }
        case Token::Kind::Ident:
            return identifier();
        case Token::Kind::LParen: {
            advance();
            ExprPtr inner = expression();
            expect_rparen();
            return inner;
        }
        default:
            throw ParseError(t.offset, {"number", "'x'", "'tau'", "'y'",
                                        "function name", "'('", "'-'"});
        }
    }

    ExprPtr identifier() {
        const Token& t = advance();
        if (t.text == "x")
            return make_variable(VarId::X);
        if (t.text == "tau")
            return make_variable(VarId::Tau);
        if (t.text == "y")
            return make_variable(VarId::Y);

        CallFn fn;
        if (t.text == "sin") fn = CallFn::Sin;
        else if (t.text == "cos") fn = CallFn::Cos;
        else if (t.text == "exp") fn = CallFn::Exp;
        else if (t.text == "abs") fn = CallFn::Abs;
        else if (t.text == "re") fn = CallFn::Re;
        else if (t.text == "im") fn = CallFn::Im;
        else if (t.text == "conj") fn = CallFn::Conj;
        else
            throw ParseError(t.offset,
                             {"'x'", "'tau'", "'y'",
                              "one of sin, cos, exp, abs, re, im, conj"});

        if (peek().kind != Token::Kind::LParen)
            throw ParseError(peek().offset, {"'('"});
        advance();
        ExprPtr arg = expression();
        expect_rparen();
        return make_call(fn, std::move(arg));
    }

    void expect_rparen() {
        if (peek().kind != Token::Kind::RParen)
            throw ParseError(peek().offset, {"')'"});
        advance();
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Pretty printer

int precedence(const ExprNode& node) {
    switch (node.kind) {
    case ExprNode::Kind::Binary:
        return (node.op == BinaryOp::Add || node.op == BinaryOp::Sub) ? 1 : 2;
    case ExprNode::Kind::Negate:
        return 3;
    default:
        return 4;
    }
}

const char* fn_name(CallFn fn) {
    switch (fn) {
    case CallFn::Sin: return "sin";
    case CallFn::Cos: return "cos";
    case CallFn::Exp: return "exp";
    case CallFn::Abs: return "abs";
    case CallFn::Re: return "re";
    case CallFn::Im: return "im";
    case CallFn::Conj: return "conj";
    }
    return "?";
}

void print_node(const ExprNode& node, std::ostringstream& os, int min_prec) {
    bool parens = precedence(node) < min_prec;
    if (parens)
        os << '(';
    switch (node.kind) {
    case ExprNode::Kind::Literal:
        if (node.literal.imag() != 0.0)
            os << format_g17(node.literal.imag()) << 'i';
        else
            os << format_g17(node.literal.real());
        break;
    case ExprNode::Kind::Variable:
        os << (node.var == VarId::X ? "x" : node.var == VarId::Tau ? "tau" : "y");
        break;
    case ExprNode::Kind::Negate:
        os << '-';
        print_node(*node.lhs, os, 3);
        break;
    case ExprNode::Kind::Binary: {
        int prec = precedence(node);
        print_node(*node.lhs, os, prec);
        switch (node.op) {
        case BinaryOp::Add: os << " + "; break;
        case BinaryOp::Sub: os << " - "; break;
        case BinaryOp::Mul: os << "*"; break;
        case BinaryOp::Div: os << "/"; break;
        }
        // Equal precedence on the right would reassociate on reparse.
        print_node(*node.rhs, os, prec + 1);
        break;
    }
    case ExprNode::Kind::Call:
        os << fn_name(node.fn) << '(';
        print_node(*node.lhs, os, 0);
        os << ')';
        break;
    }
    if (parens)
        os << ')';
}

} // namespace

// ---------------------------------------------------------------------------
// KernelExpr

KernelExpr::KernelExpr(ExprPtr root) : root_(std::move(root)) {
    if (!root_)
        throw DomainError("kernel expression requires a root node");

    // Flatten to postfix once; evaluation then never walks pointers.
    std::size_t depth = 0;
    auto emit = [&](const Instr& ins, int stack_delta) {
        program_.push_back(ins);
        depth = static_cast<std::size_t>(static_cast<long>(depth) + stack_delta);
        stack_need_ = std::max(stack_need_, depth);
    };
    auto compile = [&](auto&& self, const ExprNode& node) -> void {
        switch (node.kind) {
        case ExprNode::Kind::Literal:
            emit({OpCode::PushLit, node.literal}, +1);
            break;
        case ExprNode::Kind::Variable:
            emit({node.var == VarId::X     ? OpCode::PushX
                  : node.var == VarId::Tau ? OpCode::PushTau
                                           : OpCode::PushY},
                 +1);
            break;
        case ExprNode::Kind::Negate:
            self(self, *node.lhs);
            emit({OpCode::Neg}, 0);
            break;
        case ExprNode::Kind::Binary:
            self(self, *node.lhs);
            self(self, *node.rhs);
            switch (node.op) {
            case BinaryOp::Add: emit({OpCode::Add}, -1); break;
            case BinaryOp::Sub: emit({OpCode::Sub}, -1); break;
            case BinaryOp::Mul: emit({OpCode::Mul}, -1); break;
            case BinaryOp::Div: emit({OpCode::Div}, -1); break;
            }
            break;
        case ExprNode::Kind::Call:
            self(self, *node.lhs);
            switch (node.fn) {
            case CallFn::Sin: emit({OpCode::Sin}, 0); break;
            case CallFn::Cos: emit({OpCode::Cos}, 0); break;
            case CallFn::Exp: emit({OpCode::Exp}, 0); break;
            case CallFn::Abs: emit({OpCode::Abs}, 0); break;
            case CallFn::Re: emit({OpCode::Re}, 0); break;
            case CallFn::Im: emit({OpCode::Im}, 0); break;
            case CallFn::Conj: emit({OpCode::Conj}, 0); break;
            }
            break;
        }
    };
    compile(compile, *root_);
}

std::string KernelExpr::pretty() const {
    std::ostringstream os;
    print_node(*root_, os, 0);
    return os.str();
}

bool KernelExpr::depends_on(VarId var) const {
    auto walk = [&](auto&& self, const ExprNode& node) -> bool {
        switch (node.kind) {
        case ExprNode::Kind::Variable:
            return node.var == var;
        case ExprNode::Kind::Literal:
            return false;
        case ExprNode::Kind::Negate:
        case ExprNode::Kind::Call:
            return self(self, *node.lhs);
        case ExprNode::Kind::Binary:
            return self(self, *node.lhs) || self(self, *node.rhs);
        }
        return false;
    };
    return walk(walk, *root_);
}

std::complex<double> KernelExpr::eval(double x, double tau,
                                      std::complex<double> y) const {
    KernelEvaluator evaluator(*this);
    return evaluator(x, tau, y);
}

KernelEvaluator::KernelEvaluator(const KernelExpr& kernel)
    : kernel_(&kernel), stack_(kernel.stack_need_) {}

std::complex<double> KernelEvaluator::operator()(double x, double tau,
                                                 std::complex<double> y) {
    if (!std::isfinite(x) || !std::isfinite(tau) || !std::isfinite(y.real()) ||
        !std::isfinite(y.imag()))
        throw DomainError("kernel arguments must be finite");

    std::complex<double>* sp = stack_.data();
    auto check = [](std::complex<double> v) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw EvalError("non-finite intermediate in kernel evaluation");
        return v;
    };

    using OpCode = KernelExpr::OpCode;
    for (const auto& ins : kernel_->program_) {
        switch (ins.op) {
        case OpCode::PushLit: *sp++ = ins.literal; break;
        case OpCode::PushX: *sp++ = std::complex<double>(x, 0.0); break;
        case OpCode::PushTau: *sp++ = std::complex<double>(tau, 0.0); break;
        case OpCode::PushY: *sp++ = y; break;
        case OpCode::Neg: sp[-1] = -sp[-1]; break;
        case OpCode::Add: --sp; sp[-1] = check(sp[-1] + sp[0]); break;
        case OpCode::Sub: --sp; sp[-1] = check(sp[-1] - sp[0]); break;
        case OpCode::Mul: --sp; sp[-1] = check(sp[-1] * sp[0]); break;
        case OpCode::Div:
            --sp;
            if (sp[0] == std::complex<double>(0.0, 0.0))
                throw EvalError("division by zero in kernel evaluation");
            sp[-1] = check(sp[-1] / sp[0]);
            break;
        case OpCode::Sin: sp[-1] = check(std::sin(sp[-1])); break;
        case OpCode::Cos: sp[-1] = check(std::cos(sp[-1])); break;
        case OpCode::Exp: sp[-1] = check(std::exp(sp[-1])); break;
        case OpCode::Abs: sp[-1] = std::complex<double>(std::abs(sp[-1]), 0.0); break;
        case OpCode::Re: sp[-1] = std::complex<double>(sp[-1].real(), 0.0); break;
        case OpCode::Im: sp[-1] = std::complex<double>(sp[-1].imag(), 0.0); break;
        case OpCode::Conj: sp[-1] = std::conj(sp[-1]); break;
        }
    }
    return sp[-1];
}

KernelExpr parse_kernel(std::string_view src) {
    return KernelExpr(Parser(src).parse());
}

} // namespace vstab
