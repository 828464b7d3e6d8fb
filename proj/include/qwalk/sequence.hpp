#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

struct SourcePos {
    int line = 1;
    int column = 1;  ///< 1-based, counted in code points
};

class ParseError : public Error {
  public:
    ParseError(SourcePos pos, std::string message, std::string token);

    int line() const noexcept { return pos_.line; }
    int column() const noexcept { return pos_.column; }
    const std::string& message() const noexcept { return message_; }
    const std::string& token() const noexcept { return token_; }

  private:
    SourcePos pos_;
    std::string message_;
    std::string token_;
};

/// Arithmetic over reals, pi and named constants.
struct Expr {
    enum class Kind { number, name, negate, add, subtract, multiply, divide };
    Kind kind = Kind::number;
    double value = 0.0;   ///< number
    std::string name;     ///< name
    std::vector<Expr> operands;
    SourcePos pos;
};

struct Statement {
    enum class Kind { call, repeat };
    Kind kind = Kind::call;
    std::string name;         ///< call
    std::vector<Expr> args;   ///< call
    int count = 0;            ///< repeat
    std::vector<Statement> body;  ///< repeat
    SourcePos pos;
};

struct SequenceProgram {
    std::vector<Statement> statements;
};

/// program := stmt*; stmt := call ';' | 'repeat' INT block;
/// call := IDENT '(' args? ')'; block := '{' stmt* '}'; '#' starts a comment.
SequenceProgram parse(std::string_view source);

/// Canonical text; parse(pretty_print(p)) is structurally equal to p.
std::string pretty_print(const SequenceProgram& program);
std::string pretty_print(const Expr& expr);

/// Equality ignoring source positions.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const SequenceProgram& a, const SequenceProgram& b);

using Constants = std::map<std::string, double, std::less<>>;

/// pi, plus k = (k2 - k1)/2, k1, k2, tau and (when set) rho from the config.
Constants config_constants(const WalkConfig& config);

/// Arities, bound names, argument kinds, and reverse-after-step. Throws
/// InvalidArgument naming the statement. `overrides` win over script defines.
void check(const SequenceProgram& program, const WalkConfig& config, const Constants& overrides = {});

/// Unrolls repeats and evaluates every expression. Each instruction's origin
/// is the 1-based pre-order index of the statement that produced it.
PulseProgram expand(const SequenceProgram& program, const WalkConfig& config, const Constants& overrides = {});

struct InterpretOptions {
    Constants overrides;
    ExecutionOptions execution;
};

/// check + expand + run. Ensembles follow config.is_ensemble().
WalkRecord interpret(const SequenceProgram& program, const WalkConfig& config, const InterpretOptions& options = {});

double evaluate(const Expr& expr, const Constants& constants);

}  // namespace qwalk
