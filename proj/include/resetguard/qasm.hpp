#pragma once

#include <cctype>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "resetguard/circuit.hpp"

namespace resetguard {

enum class ParseErrorKind {
    Syntax,
    UnsupportedStatement,
    UndeclaredRegister,
    IndexRange,
    BadAngleExpr,
};

inline const char* parse_error_kind_name(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::Syntax: return "SYNTAX";
        case ParseErrorKind::UnsupportedStatement:
            return "UNSUPPORTED_STATEMENT";
        case ParseErrorKind::UndeclaredRegister: return "UNDECLARED_REGISTER";
        case ParseErrorKind::IndexRange: return "INDEX_RANGE";
        case ParseErrorKind::BadAngleExpr: return "BAD_ANGLE_EXPR";
    }
    return "?";
}

/// Parse failure with the position of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, int line, int column, std::string message)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + message + " [" +
                             parse_error_kind_name(kind) + "]"),
          kind_(kind),
          line_(line),
          column_(column),
          message_(std::move(message)) {}

    ParseErrorKind kind() const { return kind_; }
    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    ParseErrorKind kind_;
    int line_;
    int column_;
    std::string message_;
};

namespace qasm_detail {

enum class TokKind {
    Identifier,
    Number,   // integer or real literal
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semicolon,
    Arrow,    // ->
    Star,
    Slash,
    Plus,
    Minus,
    StringLit,
    End,
};

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws_and_comments();
        Token tok;
        tok.line = line_;
        tok.column = column_;
        if (pos_ >= src_.size()) {
            tok.kind = TokKind::End;
            return tok;
        }
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                    src_[pos_] == '_'))
                advance();
            tok.kind = TokKind::Identifier;
            tok.text = std::string(src_.substr(start, pos_ - start));
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return lex_number(tok);
        }
        switch (c) {
            case '(': advance(); tok.kind = TokKind::LParen; return tok;
            case ')': advance(); tok.kind = TokKind::RParen; return tok;
            case '[': advance(); tok.kind = TokKind::LBracket; return tok;
            case ']': advance(); tok.kind = TokKind::RBracket; return tok;
            case ',': advance(); tok.kind = TokKind::Comma; return tok;
            case ';': advance(); tok.kind = TokKind::Semicolon; return tok;
            case '*': advance(); tok.kind = TokKind::Star; return tok;
            case '/': advance(); tok.kind = TokKind::Slash; return tok;
            case '+': advance(); tok.kind = TokKind::Plus; return tok;
            case '-':
                advance();
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    advance();
                    tok.kind = TokKind::Arrow;
                } else {
                    tok.kind = TokKind::Minus;
                }
                return tok;
            case '"': {
                advance();
                std::size_t start = pos_;
                while (pos_ < src_.size() && src_[pos_] != '"' &&
                       src_[pos_] != '\n')
                    advance();
                if (pos_ >= src_.size() || src_[pos_] != '"')
                    throw ParseError(ParseErrorKind::Syntax, tok.line,
                                     tok.column, "unterminated string literal");
                tok.kind = TokKind::StringLit;
                tok.text = std::string(src_.substr(start, pos_ - start));
                advance();  // closing quote
                return tok;
            }
            default:
                throw ParseError(ParseErrorKind::Syntax, line_, column_,
                                 std::string("unexpected character '") + c +
                                     "'");
        }
    }

private:
    Token lex_number(Token tok) {
        std::size_t start = pos_;
        bool has_digits = false;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            advance();
            has_digits = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (pos_ < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                advance();
                has_digits = true;
            }
        }
        if (!has_digits)
            throw ParseError(ParseErrorKind::Syntax, tok.line, tok.column,
                             "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                advance();
            bool exp_digits = false;
            while (pos_ < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                advance();
                exp_digits = true;
            }
            if (!exp_digits)
                throw ParseError(ParseErrorKind::Syntax, tok.line, tok.column,
                                 "malformed exponent");
        }
        tok.kind = TokKind::Number;
        tok.text = std::string(src_.substr(start, pos_ - start));
        tok.number = std::strtod(tok.text.c_str(), nullptr);
        return tok;
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n' || c == '\r' || c == ' ' || c == '\t' || c == '\f' ||
                c == '\v') {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() &&
                       src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

struct Register {
    std::size_t offset = 0;  // flat base index
    std::size_t size = 0;
};

/// An operand as written: register name plus optional index.
struct Operand {
    std::string reg;
    std::optional<std::size_t> index;
    int line = 1;
    int column = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src, std::string name)
        : lexer_(src), name_(std::move(name)) {
        bump();
    }

    Circuit parse() {
        expect_keyword("OPENQASM", "expected 'OPENQASM 2.0;' header");
        if (cur_.kind != TokKind::Number || cur_.text != "2.0")
            fail(ParseErrorKind::Syntax, "only OPENQASM version 2.0 is supported");
        bump();
        expect(TokKind::Semicolon, "expected ';' after version");

        while (cur_.kind != TokKind::End) statement();

        if (qreg_order_.empty())
            throw ParseError(ParseErrorKind::Syntax, cur_.line, cur_.column,
                             "no qreg declared");
        Circuit circuit(num_qubits_, num_clbits_, name_);
        for (auto& instr : pending_) circuit.add(std::move(instr));
        return circuit;
    }

    /// Entry point for parsing a standalone angle expression (CLI flags,
    /// sweep spec files).
    double parse_bare_expr() {
        double v = angle_expr();
        if (cur_.kind != TokKind::End)
            fail(ParseErrorKind::BadAngleExpr,
                 "trailing input after angle expression");
        return v;
    }

private:
    void statement() {
        if (cur_.kind != TokKind::Identifier)
            fail(ParseErrorKind::Syntax, "expected a statement");
        const std::string word = cur_.text;
        if (word == "include") {
            bump();
            if (cur_.kind != TokKind::StringLit)
                fail(ParseErrorKind::Syntax, "expected include file name");
            bump();
            expect(TokKind::Semicolon, "expected ';' after include");
            return;
        }
        if (word == "qreg" || word == "creg") {
            declaration(word == "qreg");
            return;
        }
        if (word == "measure") {
            measure_statement();
            return;
        }
        if (word == "reset") {
            bump();
            auto ops = operand_list();
            expect(TokKind::Semicolon, "expected ';'");
            broadcast({GateKind::Reset, 0.0, {}, {}}, ops);
            return;
        }
        if (word == "barrier") {
            bump();
            auto ops = operand_list();
            expect(TokKind::Semicolon, "expected ';'");
            std::vector<std::uint32_t> qs;
            for (const auto& op : ops)
                for (auto q : expand_qubits(op)) qs.push_back(q);
            pending_.push_back(Instruction::barrier(std::move(qs)));
            return;
        }
        if (word == "if" || word == "opaque" || word == "gate") {
            fail(ParseErrorKind::UnsupportedStatement,
                 "'" + word + "' statements are not supported");
        }
        gate_statement(word);
    }

    void declaration(bool is_qreg) {
        bump();
        if (cur_.kind != TokKind::Identifier)
            fail(ParseErrorKind::Syntax, "expected register name");
        const std::string name = cur_.text;
        if (qregs_.count(name) || cregs_.count(name))
            fail(ParseErrorKind::Syntax, "register '" + name + "' redeclared");
        bump();
        expect(TokKind::LBracket, "expected '['");
        if (cur_.kind != TokKind::Number ||
            cur_.text.find_first_of(".eE") != std::string::npos)
            fail(ParseErrorKind::Syntax, "expected register size");
        const auto size = static_cast<std::size_t>(cur_.number);
        if (size == 0) fail(ParseErrorKind::Syntax, "register size must be > 0");
        bump();
        expect(TokKind::RBracket, "expected ']'");
        expect(TokKind::Semicolon, "expected ';'");
        if (is_qreg) {
            qregs_[name] = {num_qubits_, size};
            qreg_order_.push_back(name);
            num_qubits_ += size;
        } else {
            cregs_[name] = {num_clbits_, size};
            num_clbits_ += size;
        }
    }

    void gate_statement(const std::string& word) {
        static const std::map<std::string, GateKind> kinds = {
            {"id", GateKind::I}, {"x", GateKind::X},   {"sx", GateKind::SX},
            {"h", GateKind::H},  {"rz", GateKind::RZ}, {"rx", GateKind::RX},
            {"cx", GateKind::CX}};
        auto it = kinds.find(word);
        if (it == kinds.end())
            fail(ParseErrorKind::UnsupportedStatement,
                 "unsupported gate or statement '" + word + "'");
        const GateKind kind = it->second;
        bump();
        double angle = 0.0;
        if (has_angle(kind)) {
            expect(TokKind::LParen, "expected '(' with rotation angle");
            angle = angle_expr();
            expect(TokKind::RParen, "expected ')'");
        } else if (cur_.kind == TokKind::LParen) {
            fail(ParseErrorKind::Syntax,
                 "gate '" + word + "' takes no parameter");
        }
        auto ops = operand_list();
        expect(TokKind::Semicolon, "expected ';'");
        if (ops.size() != gate_arity(kind))
            fail(ParseErrorKind::Syntax,
                 "gate '" + word + "' expects " +
                     std::to_string(gate_arity(kind)) + " operand(s)");
        broadcast({kind, angle, {}, {}}, ops);
    }

    void measure_statement() {
        bump();
        Operand src = operand();
        expect(TokKind::Arrow, "expected '->' in measure");
        Operand dst = operand();
        expect(TokKind::Semicolon, "expected ';'");
        auto qs = expand_qubits(src);
        auto cs = expand_clbits(dst);
        if (qs.size() != cs.size())
            throw ParseError(ParseErrorKind::IndexRange, src.line, src.column,
                             "measure operand sizes differ");
        for (std::size_t i = 0; i < qs.size(); ++i)
            pending_.push_back(Instruction::measure(qs[i], cs[i]));
    }

    // Applies one gate template across possibly register-valued operands
    // (standard OpenQASM broadcast: un-indexed operands of equal size map
    // element-wise, indexed ones repeat).
    void broadcast(Instruction prototype, const std::vector<Operand>& ops) {
        std::size_t width = 1;
        for (const auto& op : ops) {
            if (op.index) continue;
            const std::size_t size = qreg_at(op).size;
            if (width != 1 && size != width)
                throw ParseError(ParseErrorKind::IndexRange, op.line,
                                 op.column,
                                 "broadcast register sizes differ");
            width = std::max(width, size);
        }
        for (std::size_t rep = 0; rep < width; ++rep) {
            Instruction instr = prototype;
            for (const auto& op : ops) {
                auto qs = expand_qubits(op);
                instr.qubits.push_back(qs.size() == 1 ? qs[0] : qs[rep]);
            }
            if (instr.qubits.size() == 2 &&
                instr.qubits[0] == instr.qubits[1])
                throw ParseError(ParseErrorKind::IndexRange, ops[0].line,
                                 ops[0].column,
                                 "two-qubit gate operands must differ");
            pending_.push_back(std::move(instr));
        }
    }

    std::vector<Operand> operand_list() {
        std::vector<Operand> ops;
        ops.push_back(operand());
        while (cur_.kind == TokKind::Comma) {
            bump();
            ops.push_back(operand());
        }
        return ops;
    }

    Operand operand() {
        if (cur_.kind != TokKind::Identifier)
            fail(ParseErrorKind::Syntax, "expected register operand");
        Operand op;
        op.reg = cur_.text;
        op.line = cur_.line;
        op.column = cur_.column;
        bump();
        if (cur_.kind == TokKind::LBracket) {
            bump();
            if (cur_.kind != TokKind::Number ||
                cur_.text.find_first_of(".eE") != std::string::npos)
                fail(ParseErrorKind::Syntax, "expected integer index");
            op.index = static_cast<std::size_t>(cur_.number);
            bump();
            expect(TokKind::RBracket, "expected ']'");
        }
        return op;
    }

    const Register& qreg_at(const Operand& op) {
        auto it = qregs_.find(op.reg);
        if (it == qregs_.end())
            throw ParseError(ParseErrorKind::UndeclaredRegister, op.line,
                             op.column,
                             "undeclared qubit register '" + op.reg + "'");
        return it->second;
    }

    std::vector<std::uint32_t> expand_qubits(const Operand& op) {
        const Register& reg = qreg_at(op);
        return expand(reg, op);
    }

    std::vector<std::uint32_t> expand_clbits(const Operand& op) {
        auto it = cregs_.find(op.reg);
        if (it == cregs_.end())
            throw ParseError(ParseErrorKind::UndeclaredRegister, op.line,
                             op.column,
                             "undeclared classical register '" + op.reg + "'");
        return expand(it->second, op);
    }

    static std::vector<std::uint32_t> expand(const Register& reg,
                                             const Operand& op) {
        std::vector<std::uint32_t> out;
        if (op.index) {
            if (*op.index >= reg.size)
                throw ParseError(ParseErrorKind::IndexRange, op.line,
                                 op.column,
                                 "index " + std::to_string(*op.index) +
                                     " out of range for '" + op.reg + "[" +
                                     std::to_string(reg.size) + "]'");
            out.push_back(static_cast<std::uint32_t>(reg.offset + *op.index));
        } else {
            for (std::size_t i = 0; i < reg.size; ++i)
                out.push_back(static_cast<std::uint32_t>(reg.offset + i));
        }
        return out;
    }

    // angle := term (('*'|'/') term)* ; term := '-'* factor ;
    // factor := number | 'pi' | '(' angle ')'
    double angle_expr(int depth = 0) {
        double value = angle_term(depth);
        while (cur_.kind == TokKind::Star || cur_.kind == TokKind::Slash) {
            const bool mul = cur_.kind == TokKind::Star;
            bump();
            const double rhs = angle_term(depth);
            value = mul ? value * rhs : value / rhs;
        }
        if (cur_.kind == TokKind::Plus || cur_.kind == TokKind::Minus)
            fail(ParseErrorKind::BadAngleExpr,
                 "additive angle expressions are not supported");
        return value;
    }

    double angle_term(int depth) {
        if (depth > 32)
            fail(ParseErrorKind::BadAngleExpr, "angle expression too deep");
        if (cur_.kind == TokKind::Minus) {
            bump();
            return -angle_term(depth + 1);
        }
        if (cur_.kind == TokKind::Number) {
            const double v = cur_.number;
            bump();
            return v;
        }
        if (cur_.kind == TokKind::Identifier && cur_.text == "pi") {
            bump();
            return std::numbers::pi;
        }
        if (cur_.kind == TokKind::LParen) {
            bump();
            const double v = angle_expr(depth + 1);
            expect(TokKind::RParen, "expected ')'");
            return v;
        }
        fail(ParseErrorKind::BadAngleExpr, "expected number, 'pi', or '('");
        return 0.0;  // unreachable
    }

    void expect(TokKind kind, const std::string& message) {
        if (cur_.kind != kind) fail(ParseErrorKind::Syntax, message);
        bump();
    }

    void expect_keyword(const std::string& word, const std::string& message) {
        if (cur_.kind != TokKind::Identifier || cur_.text != word)
            fail(ParseErrorKind::Syntax, message);
        bump();
    }

    [[noreturn]] void fail(ParseErrorKind kind, const std::string& message) {
        throw ParseError(kind, cur_.line, cur_.column, message);
    }

    void bump() { cur_ = lexer_.next(); }

    Lexer lexer_;
    Token cur_;
    std::string name_;
    std::map<std::string, Register> qregs_;
    std::map<std::string, Register> cregs_;
    std::vector<std::string> qreg_order_;
    std::size_t num_qubits_ = 0;
    std::size_t num_clbits_ = 0;
    std::vector<Instruction> pending_;
};

inline std::string format_angle(double angle) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", angle);
    return buf;
}

}  // namespace qasm_detail

/// Parses the OpenQASM 2.0 subset covering the attack/defense circuit
/// families: qreg/creg declarations (multiple registers flatten to global
/// indices in declaration order), gates {id,x,sx,h,rz,rx,cx}, measure,
/// reset and barrier. Custom gate definitions, `if`, `opaque` and the
/// u1/u2/u3 family are rejected with UNSUPPORTED_STATEMENT.
inline Circuit parse_qasm(std::string_view source, std::string name = "") {
    qasm_detail::Parser parser(source, std::move(name));
    return parser.parse();
}

/// Parses an angle expression such as "pi/2" or "-3*pi/4".
inline double parse_angle_expr(std::string_view text) {
    qasm_detail::Parser parser(text, "");
    return parser.parse_bare_expr();
}

/// Emits OpenQASM 2.0 that re-parses to an instruction-identical circuit.
/// Angles are printed with 17 significant digits so doubles round-trip
/// exactly.
inline std::string emit_qasm(const Circuit& c) {
    std::string out;
    out += "OPENQASM 2.0;\n";
    out += "include \"qelib1.inc\";\n";
    out += "qreg q[" + std::to_string(c.num_qubits()) + "];\n";
    if (c.num_clbits() > 0)
        out += "creg c[" + std::to_string(c.num_clbits()) + "];\n";
    for (const auto& instr : c) {
        switch (instr.kind) {
            case GateKind::Measure:
                out += "measure q[" + std::to_string(instr.qubits[0]) +
                       "] -> c[" + std::to_string(instr.clbits[0]) + "];\n";
                break;
            case GateKind::Reset:
                out += "reset q[" + std::to_string(instr.qubits[0]) + "];\n";
                break;
            case GateKind::Barrier: {
                if (instr.qubits.empty()) break;  // nothing to separate
                out += "barrier ";
                for (std::size_t i = 0; i < instr.qubits.size(); ++i) {
                    if (i) out += ", ";
                    out += "q[" + std::to_string(instr.qubits[i]) + "]";
                }
                out += ";\n";
                break;
            }
            default: {
                out += gate_name(instr.kind);
                if (has_angle(instr.kind))
                    out += "(" + qasm_detail::format_angle(instr.angle) + ")";
                out += " q[" + std::to_string(instr.qubits[0]) + "]";
                if (instr.qubits.size() == 2)
                    out += ", q[" + std::to_string(instr.qubits[1]) + "]";
                out += ";\n";
                break;
            }
        }
    }
    return out;
}

}  // namespace resetguard
