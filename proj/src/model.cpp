#include "mdpdistill/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mdpdistill {

ParseError::ParseError(int line, int column, const std::string& message)
    : ModelError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

bool Expr::is_boolean() const {
    switch (kind) {
        case Kind::Bool:
        case Kind::Not:
        case Kind::Eq:
        case Kind::Ne:
        case Kind::Lt:
        case Kind::Le:
        case Kind::Gt:
        case Kind::Ge:
        case Kind::And:
        case Kind::Or: return true;
        default: return false;
    }
}

long long Expr::eval(const std::vector<int>& v) const {
    switch (kind) {
        case Kind::Int:
        case Kind::Bool: return value;
        case Kind::Var: return v[static_cast<std::size_t>(var)];
        case Kind::Neg: return -lhs->eval(v);
        case Kind::Not: return !lhs->eval(v);
        case Kind::Add: return lhs->eval(v) + rhs->eval(v);
        case Kind::Sub: return lhs->eval(v) - rhs->eval(v);
        case Kind::Mul: return lhs->eval(v) * rhs->eval(v);
        case Kind::Min: return std::min(lhs->eval(v), rhs->eval(v));
        case Kind::Max: return std::max(lhs->eval(v), rhs->eval(v));
        case Kind::Eq: return lhs->eval(v) == rhs->eval(v);
        case Kind::Ne: return lhs->eval(v) != rhs->eval(v);
        case Kind::Lt: return lhs->eval(v) < rhs->eval(v);
        case Kind::Le: return lhs->eval(v) <= rhs->eval(v);
        case Kind::Gt: return lhs->eval(v) > rhs->eval(v);
        case Kind::Ge: return lhs->eval(v) >= rhs->eval(v);
        case Kind::And: return lhs->eval(v) && rhs->eval(v);
        case Kind::Or: return lhs->eval(v) || rhs->eval(v);
    }
    return 0;
}

std::string Expr::str() const {
    auto bin = [&](const char* op) { return "(" + lhs->str() + op + rhs->str() + ")"; };
    switch (kind) {
        case Kind::Int: return std::to_string(value);
        case Kind::Bool: return value ? "true" : "false";
        case Kind::Var: return name;
        case Kind::Neg: return "-" + lhs->str();
        case Kind::Not: return "!" + lhs->str();
        case Kind::Add: return bin("+");
        case Kind::Sub: return bin("-");
        case Kind::Mul: return bin("*");
        case Kind::Min: return "min(" + lhs->str() + "," + rhs->str() + ")";
        case Kind::Max: return "max(" + lhs->str() + "," + rhs->str() + ")";
        case Kind::Eq: return bin("=");
        case Kind::Ne: return bin("!=");
        case Kind::Lt: return bin("<");
        case Kind::Le: return bin("<=");
        case Kind::Gt: return bin(">");
        case Kind::Ge: return bin(">=");
        case Kind::And: return bin("&");
        case Kind::Or: return bin("|");
    }
    return "?";
}

std::vector<VarDecl> ModelAst::all_vars() const {
    std::vector<VarDecl> out;
    for (const auto& m : modules) out.insert(out.end(), m.vars.begin(), m.vars.end());
    return out;
}

std::size_t ModelAst::num_commands() const {
    std::size_t n = 0;
    for (const auto& m : modules) n += m.commands.size();
    return n;
}

namespace {

struct Token {
    enum class Kind { Ident, Int, Real, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    int line = 1, column = 1;
};

std::vector<Token> lex(const std::string& src) {
    static const char* puncts[] = {"->", "..", "<=", ">=", "!=", "=", "<", ">", "+", "-", "*", "/",
                                   "(",  ")",  "[",  "]",  ":",  ";", ",", "'", "&", "|", "!"};
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '.')) {
                if (src[j] == '.' && j + 1 < src.size() && src[j + 1] == '.') break;
                ++j;
            }
            t.kind = Token::Kind::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Token::Kind::Int;
            if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                t.kind = Token::Kind::Real;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                    t.kind = Token::Kind::Real;
                }
            }
            t.text = src.substr(i, j - i);
            advance(j - i);
            out.push_back(t);
            continue;
        }
        bool matched = false;
        for (const char* p : puncts) {
            const std::size_t n = std::char_traits<char>::length(p);
            if (src.compare(i, n, p) == 0) {
                t.kind = Token::Kind::Punct;
                t.text = p;
                advance(n);
                out.push_back(t);
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

const std::set<std::string> kKeywords = {"module", "endmodule", "init", "target", "const", "int",
                                         "true",   "false",     "min",  "max"};

class Parser {
   public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    void set_constants(const std::vector<std::pair<std::string, long long>>& constants) {
        for (const auto& [name, value] : constants) consts_[name] = value;
    }

    ModelAst model() {
        ModelAst ast;
        while (is_ident("const")) {
            next();
            if (is_ident("int")) next();
            const Token name = expect_name("constant name");
            if (consts_.count(name.text)) throw error(name, "duplicate constant '" + name.text + "'");
            expect("=");
            auto e = expr();
            expect(";");
            if (e->kind != Expr::Kind::Int) throw error(name, "constant '" + name.text + "' must be an integer");
            consts_[name.text] = e->value;
            ast.constants.emplace_back(name.text, e->value);
        }
        while (is_ident("module")) ast.modules.push_back(module());
        if (ast.modules.empty()) throw error(peek(), "expected 'module'");
        if (!is_ident("target")) throw error(peek(), "expected 'target'");
        next();
        ast.target = expr();
        if (is_punct(";")) next();
        if (peek().kind != Token::Kind::End) throw error(peek(), "unexpected '" + peek().text + "' after target");
        return ast;
    }

    ExprPtr standalone_expr() {
        auto e = expr();
        if (peek().kind != Token::Kind::End) throw error(peek(), "unexpected '" + peek().text + "'");
        return e;
    }

   private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool is_punct(const char* p) const { return peek().kind == Token::Kind::Punct && peek().text == p; }
    bool is_ident(const char* p) const { return peek().kind == Token::Kind::Ident && peek().text == p; }

    static ParseError error(const Token& t, const std::string& msg) { return ParseError(t.line, t.column, msg); }

    void expect(const char* p) {
        if (!is_punct(p)) {
            const std::string got = peek().kind == Token::Kind::End ? "end of input" : "'" + peek().text + "'";
            throw error(peek(), std::string("expected '") + p + "' but found " + got);
        }
        next();
    }

    Token expect_name(const char* what) {
        if (peek().kind != Token::Kind::Ident || kKeywords.count(peek().text)) {
            throw error(peek(), std::string("expected ") + what);
        }
        return next();
    }

    long long const_int(const char* what) {
        const Token at = peek();
        auto e = expr();
        if (e->kind != Expr::Kind::Int) throw error(at, std::string(what) + " must be a constant integer");
        return e->value;
    }

    Module module() {
        next();
        Module m;
        m.name = expect_name("module name").text;
        while (peek().kind == Token::Kind::Ident && !kKeywords.count(peek().text)) {
            const Token name = next();
            expect(":");
            expect("[");
            VarDecl v;
            v.name = name.text;
            v.lo = static_cast<int>(const_int("lower bound"));
            expect("..");
            v.hi = static_cast<int>(const_int("upper bound"));
            expect("]");
            v.init = v.lo;
            if (is_ident("init")) {
                next();
                v.init = static_cast<int>(const_int("initial value"));
            }
            expect(";");
            if (v.lo > v.hi) throw error(name, "empty range for variable '" + v.name + "'");
            if (v.init < v.lo || v.init > v.hi) throw error(name, "initial value of '" + v.name + "' outside its range");
            m.vars.push_back(v);
        }
        while (is_punct("[")) m.commands.push_back(command());
        if (!is_ident("endmodule")) throw error(peek(), "expected a command or 'endmodule'");
        next();
        return m;
    }

    Command command() {
        Command c;
        c.line = peek().line;
        next();
        if (!is_punct("]")) c.label = expect_name("action label").text;
        expect("]");
        c.guard = expr();
        const Token arrow = peek();
        expect("->");
        double total = 0.0;
        do {
            if (!c.alternatives.empty()) next();
            Alternative alt;
            const Token at = peek();
            if (peek().kind == Token::Kind::Real || peek().kind == Token::Kind::Int) {
                alt.prob = probability();
                expect(":");
                if (!(alt.prob > 0.0)) throw error(at, "probability must be positive");
            }
            alt.updates = updates();
            total += alt.prob;
            c.alternatives.push_back(std::move(alt));
        } while (is_punct("+"));
        expect(";");
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "probabilities sum to " << total << ", not 1";
            throw error(arrow, msg.str());
        }
        return c;
    }

    double probability() {
        const Token t = next();
        double p = std::stod(t.text);
        if (t.kind == Token::Kind::Int && is_punct("/")) {
            next();
            if (peek().kind != Token::Kind::Int) throw error(peek(), "expected an integer denominator");
            const double q = std::stod(next().text);
            if (q == 0.0) throw error(t, "zero denominator");
            p /= q;
        }
        return p;
    }

    std::vector<Update> updates() {
        std::vector<Update> out;
        if (is_ident("true")) {
            next();
            return out;
        }
        while (true) {
            expect("(");
            while (true) {
                const Token name = expect_name("variable name");
                expect("'");
                expect("=");
                out.push_back(Update{name.text, -1, additive()});
                if (!is_punct("&")) break;
                next();
            }
            expect(")");
            if (!is_punct("&")) break;
            next();
        }
        return out;
    }

    ExprPtr make(Expr::Kind kind, const Token& at, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        e->line = at.line;
        e->column = at.column;
        return fold(e);
    }

    // Constant folding keeps const-only bounds literal; mixed-type operands are left for the checker.
    static ExprPtr fold(const std::shared_ptr<Expr>& e) {
        using K = Expr::Kind;
        const bool logical = e->kind == K::Not || e->kind == K::And || e->kind == K::Or;
        const K want = logical ? K::Bool : K::Int;
        if (!e->lhs || e->lhs->kind != want || (e->rhs && e->rhs->kind != want)) return e;
        auto lit = std::make_shared<Expr>(*e);
        lit->value = e->eval({});
        lit->kind = e->is_boolean() ? K::Bool : K::Int;
        lit->lhs = lit->rhs = nullptr;
        return lit;
    }

    ExprPtr expr() { return disjunction(); }

    ExprPtr disjunction() {
        auto e = conjunction();
        while (is_punct("|")) {
            const Token at = next();
            e = make(Expr::Kind::Or, at, e, conjunction());
        }
        return e;
    }

    ExprPtr conjunction() {
        auto e = negation();
        while (is_punct("&")) {
            const Token at = next();
            e = make(Expr::Kind::And, at, e, negation());
        }
        return e;
    }

    ExprPtr negation() {
        if (is_punct("!")) {
            const Token at = next();
            return make(Expr::Kind::Not, at, negation());
        }
        return comparison();
    }

    ExprPtr comparison() {
        auto e = additive();
        static const std::pair<const char*, Expr::Kind> ops[] = {{"=", Expr::Kind::Eq},  {"!=", Expr::Kind::Ne},
                                                                 {"<", Expr::Kind::Lt},  {"<=", Expr::Kind::Le},
                                                                 {">", Expr::Kind::Gt},  {">=", Expr::Kind::Ge}};
        for (const auto& [text, kind] : ops) {
            if (is_punct(text)) {
                const Token at = next();
                return make(kind, at, e, additive());
            }
        }
        return e;
    }

    ExprPtr additive() {
        auto e = term();
        while (is_punct("+") || is_punct("-")) {
            // A '+' followed by a probability and ':' starts the next alternative.
            if (is_punct("+") && pos_ + 2 < toks_.size() &&
                (toks_[pos_ + 1].kind == Token::Kind::Real || toks_[pos_ + 1].kind == Token::Kind::Int) &&
                toks_[pos_ + 2].kind == Token::Kind::Punct &&
                (toks_[pos_ + 2].text == ":" || toks_[pos_ + 2].text == "/")) {
                break;
            }
            const Token at = next();
            e = make(at.text == "+" ? Expr::Kind::Add : Expr::Kind::Sub, at, e, term());
        }
        return e;
    }

    ExprPtr term() {
        auto e = unary();
        while (is_punct("*")) {
            const Token at = next();
            e = make(Expr::Kind::Mul, at, e, unary());
        }
        return e;
    }

    ExprPtr unary() {
        if (is_punct("-")) {
            const Token at = next();
            return make(Expr::Kind::Neg, at, unary());
        }
        return primary();
    }

    ExprPtr primary() {
        const Token t = peek();
        if (t.kind == Token::Kind::Int) {
            next();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Int;
            try {
                e->value = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                throw error(t, "integer literal out of range");
            }
            e->line = t.line;
            e->column = t.column;
            return e;
        }
        if (t.kind == Token::Kind::Real) throw error(t, "real number not allowed here");
        if (is_punct("(")) {
            next();
            auto e = expr();
            expect(")");
            return e;
        }
        if (t.kind == Token::Kind::Ident) {
            if (t.text == "true" || t.text == "false") {
                next();
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::Bool;
                e->value = t.text == "true";
                e->line = t.line;
                e->column = t.column;
                return e;
            }
            if (t.text == "min" || t.text == "max") {
                next();
                expect("(");
                auto a = expr();
                expect(",");
                auto b = expr();
                while (is_punct(",")) {
                    const Token at = next();
                    a = make(t.text == "min" ? Expr::Kind::Min : Expr::Kind::Max, at, a, b);
                    b = expr();
                }
                expect(")");
                return make(t.text == "min" ? Expr::Kind::Min : Expr::Kind::Max, t, a, b);
            }
            if (kKeywords.count(t.text)) throw error(t, "unexpected keyword '" + t.text + "'");
            next();
            auto e = std::make_shared<Expr>();
            e->line = t.line;
            e->column = t.column;
            auto c = consts_.find(t.text);
            if (c != consts_.end()) {
                e->kind = Expr::Kind::Int;
                e->value = c->second;
            } else {
                e->kind = Expr::Kind::Var;
                e->name = t.text;
            }
            return e;
        }
        const std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
        throw error(t, "expected an expression but found " + got);
    }

   private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::map<std::string, long long> consts_;
};

// Resolves variable names and checks types; returns a rebuilt tree.
ExprPtr resolve(const ExprPtr& e, const std::unordered_map<std::string, int>& vars, bool want_bool) {
    auto fail = [&](const std::string& msg) { return ParseError(e->line, e->column, msg); };
    auto out = std::make_shared<Expr>(*e);
    using K = Expr::Kind;
    auto operands = [&](bool operand_bool) {
        if (e->lhs) out->lhs = resolve(e->lhs, vars, operand_bool);
        if (e->rhs) out->rhs = resolve(e->rhs, vars, operand_bool);
    };
    switch (e->kind) {
        case K::Var: {
            auto it = vars.find(e->name);
            if (it == vars.end()) throw fail("unknown identifier '" + e->name + "'");
            out->var = it->second;
            break;
        }
        case K::Int:
        case K::Bool: break;
        case K::Neg:
        case K::Add:
        case K::Sub:
        case K::Mul:
        case K::Min:
        case K::Max:
        case K::Lt:
        case K::Le:
        case K::Gt:
        case K::Ge: operands(false); break;
        case K::Not:
        case K::And:
        case K::Or: operands(true); break;
        case K::Eq:
        case K::Ne: operands(e->lhs->is_boolean()); break;
    }
    if (out->is_boolean() != want_bool) {
        throw fail(std::string("type error: expected ") + (want_bool ? "a boolean" : "an integer") +
                   " expression but found '" + e->str() + "'");
    }
    return out;
}

void check_model(ModelAst& ast) {
    std::unordered_map<std::string, int> vars;
    std::unordered_map<std::string, int> owner;
    std::set<std::string> module_names;
    int index = 0;
    for (std::size_t mi = 0; mi < ast.modules.size(); ++mi) {
        const auto& m = ast.modules[mi];
        if (!module_names.insert(m.name).second) throw ModelError("duplicate module '" + m.name + "'");
        for (const auto& v : m.vars) {
            if (!vars.emplace(v.name, index++).second) throw ModelError("duplicate variable '" + v.name + "'");
            owner[v.name] = static_cast<int>(mi);
        }
    }
    for (std::size_t mi = 0; mi < ast.modules.size(); ++mi) {
        auto& m = ast.modules[mi];
        for (auto& c : m.commands) {
            c.guard = resolve(c.guard, vars, true);
            for (auto& alt : c.alternatives) {
                std::set<int> assigned;
                for (auto& u : alt.updates) {
                    auto it = vars.find(u.var_name);
                    if (it == vars.end()) {
                        throw ParseError(c.line, 1, "unknown identifier '" + u.var_name + "' in update");
                    }
                    if (owner[u.var_name] != static_cast<int>(mi)) {
                        throw ParseError(c.line, 1, "module '" + m.name + "' updates variable '" + u.var_name +
                                                        "' owned by another module");
                    }
                    if (!assigned.insert(it->second).second) {
                        throw ParseError(c.line, 1, "variable '" + u.var_name + "' updated twice in one alternative");
                    }
                    u.var = it->second;
                    u.value = resolve(u.value, vars, false);
                }
            }
        }
    }
    ast.target = resolve(ast.target, vars, true);
}

}  // namespace

ModelAst parse_model(const std::string& text) {
    Parser parser(lex(text));
    ModelAst ast = parser.model();
    check_model(ast);
    return ast;
}

ExprPtr parse_condition(const std::string& text, const ModelAst& model) {
    Parser parser(lex(text));
    parser.set_constants(model.constants);
    auto e = parser.standalone_expr();
    std::unordered_map<std::string, int> vars;
    int index = 0;
    for (const auto& v : model.all_vars()) vars.emplace(v.name, index++);
    return resolve(e, vars, true);
}

ExprPtr parse_condition(const std::string& text, const std::vector<VarDecl>& vars) {
    Parser parser(lex(text));
    auto e = parser.standalone_expr();
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < vars.size(); ++i) index.emplace(vars[i].name, static_cast<int>(i));
    return resolve(e, index, true);
}

namespace {

struct Source {
    int module = -1;  // unlabeled: module index; labelled: -1
    int command = -1;
    std::string label;
};

struct Outcome {
    double prob;
    std::vector<const Update*> updates;
};

}  // namespace

Mdp build_mdp(const ModelAst& model, const BuildOptions& options) {
    const auto vars = model.all_vars();
    const int m = static_cast<int>(model.modules.size());
    MdpBuilder builder(vars, m);

    // Action sources in declaration order; a label appears where it is first declared.
    std::vector<Source> sources;
    std::vector<int> source_action;
    std::map<std::string, std::vector<std::vector<const Command*>>> by_label;
    for (int mi = 0; mi < m; ++mi) {
        const auto& mod = model.modules[static_cast<std::size_t>(mi)];
        for (std::size_t ci = 0; ci < mod.commands.size(); ++ci) {
            const auto& c = mod.commands[ci];
            if (!c.label) {
                sources.push_back({mi, static_cast<int>(ci), {}});
                source_action.push_back(builder.intern_action(mod.name + ".cmd" + std::to_string(ci + 1)));
                continue;
            }
            auto [it, fresh] = by_label.try_emplace(*c.label, std::vector<std::vector<const Command*>>(m));
            if (fresh) {
                sources.push_back({-1, -1, *c.label});
                source_action.push_back(builder.intern_action(*c.label));
            }
            it->second[static_cast<std::size_t>(mi)].push_back(&c);
        }
    }

    std::vector<int> init;
    for (const auto& v : vars) init.push_back(v.init);
    std::deque<StateId> queue;
    builder.set_initial(builder.add_state(init));
    queue.push_back(0);

    std::vector<int> val, succ;
    auto apply = [&](const std::vector<const Update*>& updates, const Command& c) {
        succ = val;
        for (const Update* u : updates) {
            const long long x = u->value->eval(val);
            const auto& decl = vars[static_cast<std::size_t>(u->var)];
            if (x < decl.lo || x > decl.hi) {
                std::ostringstream msg;
                msg << "update " << decl.name << "'=" << u->value->str() << " gives " << x << ", outside [" << decl.lo
                    << ".." << decl.hi << "] (command at line " << c.line << ")";
                throw ModelError(msg.str());
            }
            succ[static_cast<std::size_t>(u->var)] = static_cast<int>(x);
        }
    };
    auto describe = [&](const std::vector<int>& v) {
        std::string out;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (i) out += ",";
            out += vars[i].name + "=" + std::to_string(v[i]);
        }
        return out;
    };

    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        val = builder.valuation(s);
        if (model.target->eval(val)) {
            builder.add_target(s);
            continue;
        }
        bool any = false;
        auto emit = [&](int action, int module, const std::vector<Outcome>& outcomes, const Command& c) {
            std::vector<Transition> dist;
            for (const auto& o : outcomes) {
                apply(o.updates, c);
                bool added = false;
                const StateId t = builder.find_or_add_state(succ, &added);
                if (added) {
                    if (builder.num_states() > options.max_states) {
                        throw ModelError("state space exceeds the cap of " + std::to_string(options.max_states) +
                                         " states (" + std::to_string(builder.num_states()) + " built so far)");
                    }
                    queue.push_back(t);
                }
                dist.push_back({t, o.prob});
            }
            builder.add_choice(s, ActionAttr{action, module}, std::move(dist));
            any = true;
        };
        for (std::size_t si = 0; si < sources.size(); ++si) {
            const Source& src = sources[si];
            if (src.module >= 0) {
                const auto& c = model.modules[static_cast<std::size_t>(src.module)].commands[static_cast<std::size_t>(src.command)];
                if (!c.guard->eval(val)) continue;
                std::vector<Outcome> outcomes;
                for (const auto& alt : c.alternatives) {
                    Outcome o{alt.prob, {}};
                    for (const auto& u : alt.updates) o.updates.push_back(&u);
                    outcomes.push_back(std::move(o));
                }
                emit(source_action[si], src.module + 1, outcomes, c);
                continue;
            }
            const auto& per_module = by_label.at(src.label);
            std::vector<std::vector<const Command*>> enabled;
            bool blocked = false;
            for (const auto& cmds : per_module) {
                if (cmds.empty()) continue;
                std::vector<const Command*> on;
                for (const Command* c : cmds) {
                    if (c->guard->eval(val)) on.push_back(c);
                }
                if (on.empty()) {
                    blocked = true;
                    break;
                }
                enabled.push_back(std::move(on));
            }
            if (blocked) continue;
            std::vector<std::size_t> pick(enabled.size(), 0);
            bool done = false;
            while (!done) {
                std::vector<Outcome> outcomes{Outcome{1.0, {}}};
                for (std::size_t j = 0; j < enabled.size(); ++j) {
                    std::vector<Outcome> next;
                    for (const auto& o : outcomes) {
                        for (const auto& alt : enabled[j][pick[j]]->alternatives) {
                            Outcome n{o.prob * alt.prob, o.updates};
                            for (const auto& u : alt.updates) n.updates.push_back(&u);
                            next.push_back(std::move(n));
                        }
                    }
                    outcomes = std::move(next);
                }
                emit(source_action[si], 0, outcomes, *enabled[0][pick[0]]);
                done = true;
                for (std::size_t j = enabled.size(); j-- > 0;) {
                    if (++pick[j] < enabled[j].size()) {
                        done = false;
                        break;
                    }
                    pick[j] = 0;
                }
            }
        }
        if (!any) throw ModelError("deadlock: no command enabled in state " + describe(val));
    }
    return std::move(builder).finish();
}

}  // namespace mdpdistill
