#include "qwalk/sequence.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace qwalk {

ParseError::ParseError(SourcePos pos, std::string message, std::string token)
    : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message +
            (token.empty() ? std::string{} : " (found " + token + ")")),
      pos_(pos),
      message_(std::move(message)),
      token_(std::move(token)) {}

namespace {

enum class Tok { ident, number, lparen, rparen, lbrace, rbrace, comma, semicolon, plus, minus, star, slash, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    SourcePos pos;
};

std::string describe(const Token& t) {
    return t.kind == Tok::end ? std::string("end of input") : "'" + t.text + "'";
}

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = pos_;
            if (i_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[i_];
            if (is_ident_start(c)) {
                const std::size_t start = i_;
                while (i_ < src_.size() && (is_ident_start(src_[i_]) || is_digit(src_[i_]))) {
                    advance();
                }
                t.kind = Tok::ident;
                t.text = std::string(src_.substr(start, i_ - start));
            } else if (is_digit(c) || (c == '.' && i_ + 1 < src_.size() && is_digit(src_[i_ + 1]))) {
                t.kind = Tok::number;
                t.text = number_text();
            } else {
                t.text = std::string(1, c);
                switch (c) {
                    case '(': t.kind = Tok::lparen; break;
                    case ')': t.kind = Tok::rparen; break;
                    case '{': t.kind = Tok::lbrace; break;
                    case '}': t.kind = Tok::rbrace; break;
                    case ',': t.kind = Tok::comma; break;
                    case ';': t.kind = Tok::semicolon; break;
                    case '+': t.kind = Tok::plus; break;
                    case '-': t.kind = Tok::minus; break;
                    case '*': t.kind = Tok::star; break;
                    case '/': t.kind = Tok::slash; break;
                    default:
                        throw ParseError(pos_, "unexpected character", "'" + code_point() + "'");
                }
                advance();
            }
            out.push_back(std::move(t));
        }
    }

  private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

    void advance() {
        const auto byte = static_cast<unsigned char>(src_[i_++]);
        if (byte == '\n') {
            ++pos_.line;
            pos_.column = 1;
        } else if ((byte & 0xC0) != 0x80) {
            ++pos_.column;
        }
    }

    std::string code_point() const {
        std::size_t j = i_ + 1;
        while (j < src_.size() && (static_cast<unsigned char>(src_[j]) & 0xC0) == 0x80) {
            ++j;
        }
        return std::string(src_.substr(i_, j - i_));
    }

    void skip_space() {
        while (i_ < src_.size()) {
            const char c = src_[i_];
            if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n') {
                    advance();
                }
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                return;
            }
        }
    }

    std::string number_text() {
        const std::size_t start = i_;
        while (i_ < src_.size() && is_digit(src_[i_])) advance();
        if (i_ < src_.size() && src_[i_] == '.') {
            advance();
            while (i_ < src_.size() && is_digit(src_[i_])) advance();
        }
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            std::size_t j = i_ + 1;
            if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
            if (j < src_.size() && is_digit(src_[j])) {
                while (i_ < j) advance();
                while (i_ < src_.size() && is_digit(src_[i_])) advance();
            }
        }
        return std::string(src_.substr(start, i_ - start));
    }

    std::string_view src_;
    std::size_t i_ = 0;
    SourcePos pos_;
};

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    SequenceProgram program() {
        SequenceProgram p;
        while (peek().kind != Tok::end) {
            p.statements.push_back(statement());
        }
        return p;
    }

  private:
    const Token& peek() const { return toks_[i_]; }
    Token next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(peek().pos, message, describe(peek()));
    }

    Token expect(Tok kind, const std::string& message) {
        if (peek().kind != kind) {
            fail(message);
        }
        return next();
    }

    Statement statement() {
        if (peek().kind != Tok::ident) {
            fail("expected a statement (identifier or 'repeat')");
        }
        Token head = next();
        Statement s;
        s.pos = head.pos;
        if (head.text == "repeat") {
            s.kind = Statement::Kind::repeat;
            if (peek().kind != Tok::number) {
                fail("expected integer repeat count");
            }
            const Token count = peek();
            int value = 0;
            const auto* first = count.text.data();
            const auto* last = first + count.text.size();
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last) {
                fail("expected integer repeat count");
            }
            if (value < 1) {
                fail("expected repeat count >= 1");
            }
            next();
            s.count = value;
            const Token open = expect(Tok::lbrace, "expected '{' to open repeat block");
            while (peek().kind != Tok::rbrace) {
                if (peek().kind == Tok::end) {
                    fail("unclosed repeat block opened at " + std::to_string(open.pos.line) + ":" +
                         std::to_string(open.pos.column) + ": expected '}'");
                }
                s.body.push_back(statement());
            }
            next();
            return s;
        }
        s.kind = Statement::Kind::call;
        s.name = head.text;
        const Token open = expect(Tok::lparen, "expected '(' after '" + head.text + "'");
        const std::string where = std::to_string(open.pos.line) + ":" + std::to_string(open.pos.column);
        if (peek().kind != Tok::rparen) {
            for (;;) {
                if (peek().kind == Tok::end) {
                    fail("unclosed argument list opened at " + where + ": expected expression or ')'");
                }
                s.args.push_back(expression());
                if (peek().kind == Tok::comma) {
                    next();
                    continue;
                }
                if (peek().kind != Tok::rparen) {
                    fail("unclosed argument list opened at " + where + ": expected ',' or ')'");
                }
                break;
            }
        }
        next();
        expect(Tok::semicolon, "expected ';' after call");
        return s;
    }

    Expr expression() {
        Expr lhs = term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const Token op = next();
            Expr e;
            e.kind = op.kind == Tok::plus ? Expr::Kind::add : Expr::Kind::subtract;
            e.pos = op.pos;
            e.operands.push_back(std::move(lhs));
            e.operands.push_back(term());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            const Token op = next();
            Expr e;
            e.kind = op.kind == Tok::star ? Expr::Kind::multiply : Expr::Kind::divide;
            e.pos = op.pos;
            e.operands.push_back(std::move(lhs));
            e.operands.push_back(unary());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr unary() {
        if (peek().kind == Tok::minus) {
            const Token op = next();
            Expr e;
            e.kind = Expr::Kind::negate;
            e.pos = op.pos;
            e.operands.push_back(unary());
            return e;
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        Expr e;
        e.pos = t.pos;
        switch (t.kind) {
            case Tok::number: {
                const auto* first = t.text.data();
                const auto* last = first + t.text.size();
                const auto [ptr, ec] = std::from_chars(first, last, e.value);
                if (ec != std::errc{} || ptr != last || !std::isfinite(e.value)) {
                    fail("number out of range");
                }
                e.kind = Expr::Kind::number;
                next();
                return e;
            }
            case Tok::ident:
                e.kind = Expr::Kind::name;
                e.name = t.text;
                next();
                return e;
            case Tok::lparen: {
                const Token open = next();
                Expr inner = expression();
                if (peek().kind != Tok::rparen) {
                    fail("unclosed parenthesis opened at " + std::to_string(open.pos.line) + ":" +
                         std::to_string(open.pos.column) + ": expected ')'");
                }
                next();
                return inner;
            }
            default:
                fail("expected expression (number, name or '(')");
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    // Keep literals lexable: to_chars may emit "1e+20" which the lexer accepts,
    // but never a leading sign because negatives are negate nodes.
    return s;
}

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::add:
        case Expr::Kind::subtract:
            return 1;
        case Expr::Kind::multiply:
        case Expr::Kind::divide:
            return 2;
        case Expr::Kind::negate:
            return 3;
        default:
            return 4;
    }
}

void print_expr(const Expr& e, std::ostringstream& out) {
    auto child = [&](const Expr& c, bool paren) {
        if (paren) out << '(';
        print_expr(c, out);
        if (paren) out << ')';
    };
    switch (e.kind) {
        case Expr::Kind::number:
            if (e.value < 0.0 || std::signbit(e.value)) {
                out << "(-" << format_number(-e.value) << ')';
            } else {
                out << format_number(e.value);
            }
            return;
        case Expr::Kind::name:
            out << e.name;
            return;
        case Expr::Kind::negate:
            out << '-';
            child(e.operands[0], precedence(e.operands[0]) < 3);
            return;
        default: {
            const int p = precedence(e);
            const char* op = e.kind == Expr::Kind::add        ? " + "
                             : e.kind == Expr::Kind::subtract ? " - "
                             : e.kind == Expr::Kind::multiply ? " * "
                                                              : " / ";
            child(e.operands[0], precedence(e.operands[0]) < p);
            out << op;
            child(e.operands[1], precedence(e.operands[1]) <= p);
        }
    }
}

void print_statements(const std::vector<Statement>& stmts, int indent, std::ostringstream& out) {
    for (const Statement& s : stmts) {
        out << std::string(static_cast<std::size_t>(indent), ' ');
        if (s.kind == Statement::Kind::repeat) {
            out << "repeat " << s.count << " {\n";
            print_statements(s.body, indent + 4, out);
            out << std::string(static_cast<std::size_t>(indent), ' ') << "}\n";
            continue;
        }
        out << s.name << '(';
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            if (i > 0) out << ", ";
            print_expr(s.args[i], out);
        }
        out << ");\n";
    }
}

}  // namespace

SequenceProgram parse(std::string_view source) { return Parser(Lexer(source).run()).program(); }

std::string pretty_print(const Expr& expr) {
    std::ostringstream out;
    print_expr(expr, out);
    return out.str();
}

std::string pretty_print(const SequenceProgram& program) {
    std::ostringstream out;
    print_statements(program.statements, 0, out);
    return out.str();
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.operands.size() != b.operands.size()) return false;
    if (a.kind == Expr::Kind::number && a.value != b.value) return false;
    if (a.kind == Expr::Kind::name && a.name != b.name) return false;
    for (std::size_t i = 0; i < a.operands.size(); ++i) {
        if (!structurally_equal(a.operands[i], b.operands[i])) return false;
    }
    return true;
}

namespace {

bool equal_statements(const std::vector<Statement>& a, const std::vector<Statement>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Statement& x = a[i];
        const Statement& y = b[i];
        if (x.kind != y.kind) return false;
        if (x.kind == Statement::Kind::repeat) {
            if (x.count != y.count || !equal_statements(x.body, y.body)) return false;
            continue;
        }
        if (x.name != y.name || x.args.size() != y.args.size()) return false;
        for (std::size_t j = 0; j < x.args.size(); ++j) {
            if (!structurally_equal(x.args[j], y.args[j])) return false;
        }
    }
    return true;
}

}  // namespace

bool structurally_equal(const SequenceProgram& a, const SequenceProgram& b) {
    return equal_statements(a.statements, b.statements);
}

Constants config_constants(const WalkConfig& config) {
    Constants c;
    c["pi"] = std::numbers::pi;
    c["k1"] = config.kick.k1;
    c["k2"] = config.kick.k2;
    c["k"] = 0.5 * (config.kick.k2 - config.kick.k1);
    c["tau"] = config.tau;
    if (config.rho) {
        c["rho"] = *config.rho;
    }
    return c;
}

double evaluate(const Expr& e, const Constants& constants) {
    switch (e.kind) {
        case Expr::Kind::number:
            return e.value;
        case Expr::Kind::name: {
            const auto it = constants.find(e.name);
            if (it == constants.end()) {
                throw InvalidArgument("unbound name '" + e.name + "' at " + std::to_string(e.pos.line) + ":" +
                                      std::to_string(e.pos.column));
            }
            return it->second;
        }
        case Expr::Kind::negate:
            return -evaluate(e.operands[0], constants);
        case Expr::Kind::add:
            return evaluate(e.operands[0], constants) + evaluate(e.operands[1], constants);
        case Expr::Kind::subtract:
            return evaluate(e.operands[0], constants) - evaluate(e.operands[1], constants);
        case Expr::Kind::multiply:
            return evaluate(e.operands[0], constants) * evaluate(e.operands[1], constants);
        case Expr::Kind::divide: {
            const double d = evaluate(e.operands[1], constants);
            if (d == 0.0) {
                throw InvalidArgument("division by zero at " + std::to_string(e.pos.line) + ":" +
                                      std::to_string(e.pos.column));
            }
            return evaluate(e.operands[0], constants) / d;
        }
    }
    return 0.0;
}

namespace {

struct Signature {
    std::size_t min_args;
    std::size_t max_args;
};

const std::map<std::string, Signature, std::less<>>& signatures() {
    static const std::map<std::string, Signature, std::less<>> table{
        {"gate", {2, 2}},        {"coin", {2, 2}},     {"biased_coin", {2, 2}}, {"kick", {1, 2}},
        {"free", {1, 1}},        {"ideal_shift", {1, 1}}, {"reverse", {0, 1}},  {"measure", {0, 1}},
        {"define", {2, 2}},
    };
    return table;
}

// Walks the statement tree once, shared by check() and expand(). With emit
// set it also produces instructions.
class Expander {
  public:
    Expander(const WalkConfig& config, const Constants& overrides, PulseProgram* out)
        : config_(config), overrides_(overrides), out_(out), constants_(config_constants(config)) {
        for (const auto& [name, value] : overrides) {
            constants_[name] = value;
        }
    }

    void run(const std::vector<Statement>& stmts) {
        for (const Statement& s : stmts) {
            statement(s);
        }
    }

  private:
    std::string where(const Statement& s) const {
        return "statement " + std::to_string(index_) + " (line " + std::to_string(s.pos.line) + "): ";
    }

    [[noreturn]] void fail(const Statement& s, const std::string& message) const {
        throw InvalidArgument(where(s) + message);
    }

    double value(const Statement& s, std::size_t arg) {
        try {
            return evaluate(s.args[arg], constants_);
        } catch (const InvalidArgument& e) {
            fail(s, e.what());
        }
    }

    std::string bare_name(const Statement& s, std::size_t arg, const char* what) {
        const Expr& e = s.args[arg];
        if (e.kind != Expr::Kind::name) {
            fail(s, std::string("expected ") + what + " as a bare name");
        }
        return e.name;
    }

    void emit(Operation op) {
        if (out_ != nullptr) {
            out_->instructions.push_back({std::move(op), index_});
        }
    }

    void statement(const Statement& s) {
        ++index_;
        if (s.kind == Statement::Kind::repeat) {
            const int base = index_;
            for (int r = 0; r < s.count; ++r) {
                index_ = base;
                for (const Statement& inner : s.body) {
                    statement(inner);
                }
                // Without emission one pass suffices, except to register steps.
                if (out_ == nullptr && r == 0) {
                    break;
                }
            }
            return;
        }
        const auto sig = signatures().find(s.name);
        if (sig == signatures().end()) {
            fail(s, "unknown statement '" + s.name + "'");
        }
        if (s.args.size() < sig->second.min_args || s.args.size() > sig->second.max_args) {
            fail(s, "'" + s.name + "' takes " + std::to_string(sig->second.min_args) +
                        (sig->second.min_args == sig->second.max_args
                             ? std::string{}
                             : " to " + std::to_string(sig->second.max_args)) +
                        " arguments, got " + std::to_string(s.args.size()));
        }
        const std::string& n = s.name;
        if (n == "define") {
            const std::string name = bare_name(s, 0, "constant name");
            if (name == "pi") {
                fail(s, "pi cannot be redefined");
            }
            const double v = value(s, 1);
            if (!overrides_.contains(name)) {
                constants_[name] = v;
            }
        } else if (n == "gate" || n == "coin") {
            const double alpha = value(s, 0);
            const double chi = value(s, 1);
            emit(PulseOp{coin_matrix(alpha, chi, n == "gate" ? CoinLabel::gate : CoinLabel::coin), true});
        } else if (n == "biased_coin") {
            const double rho = value(s, 0);
            const double chi = value(s, 1);
            if (!(rho >= 0.0 && rho <= 1.0)) {
                fail(s, "biased_coin rho must lie in [0, 1], got " + std::to_string(rho));
            }
            BiasVariant variant{};
            if (std::abs(chi - std::numbers::pi) < 1e-12) {
                variant = BiasVariant::pi;
            } else if (std::abs(chi + std::numbers::pi / 2) < 1e-12) {
                variant = BiasVariant::minus_half_pi;
            } else {
                fail(s, "biased_coin phase must be pi or -pi/2");
            }
            emit(PulseOp{biased_coin(rho, variant), true});
        } else if (n == "kick") {
            KickParams k;
            if (s.args.size() == 1) {
                k = KickParams::symmetric(value(s, 0));
            } else {
                k = KickParams{value(s, 0), value(s, 1)};
            }
            try {
                validate_kick(k, config_.k_max);
            } catch (const InvalidArgument& e) {
                fail(s, e.what());
            }
            ++steps_;
            emit(KickOp{k});
        } else if (n == "free") {
            emit(FreeOp{value(s, 0)});
        } else if (n == "ideal_shift") {
            const double q = value(s, 0);
            if (!(q >= 1.0) || std::abs(q - std::round(q)) > 1e-9 || q > 1e6) {
                fail(s, "ideal_shift needs a positive integer, got " + std::to_string(q));
            }
            ++steps_;
            emit(ShiftOp{static_cast<int>(std::lround(q))});
        } else if (n == "reverse") {
            ReverseMode mode = ReverseMode::adjoint;
            if (!s.args.empty()) {
                const std::string m = bare_name(s, 0, "reverse mode (adjoint or composed)");
                if (m == "composed") {
                    mode = ReverseMode::composed;
                } else if (m != "adjoint") {
                    fail(s, "unknown reverse mode '" + m + "'; expected adjoint or composed");
                }
            }
            if (steps_ == 0) {
                fail(s, "reverse is only valid after at least one kick or ideal_shift");
            }
            emit(ReverseOp{mode});
        } else if (n == "measure") {
            std::string label = "step";
            if (!s.args.empty()) {
                label = bare_name(s, 0, "measurement label");
            }
            if (label == "step") {
                label = std::to_string(steps_);
            }
            emit(MeasureOp{label});
        }
    }

    const WalkConfig& config_;
    const Constants& overrides_;
    PulseProgram* out_;
    Constants constants_;
    int index_ = 0;
    long long steps_ = 0;
};

}  // namespace

void check(const SequenceProgram& program, const WalkConfig& config, const Constants& overrides) {
    Expander(config, overrides, nullptr).run(program.statements);
}

PulseProgram expand(const SequenceProgram& program, const WalkConfig& config, const Constants& overrides) {
    PulseProgram out;
    out.origin_kind = "statement";
    Expander(config, overrides, &out).run(program.statements);
    return out;
}

WalkRecord interpret(const SequenceProgram& program, const WalkConfig& config, const InterpretOptions& options) {
    check(program, config, options.overrides);
    const PulseProgram expanded = expand(program, config, options.overrides);
    return run_program(expanded, config, config.is_ensemble(), options.execution);
}

}  // namespace qwalk
