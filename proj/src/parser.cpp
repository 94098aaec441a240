#include "coda/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <charconv>
#include <set>
#include <sstream>

namespace coda {

namespace {

enum class Tok { Ident, Int, String, Punct, End };

struct Token
{
    Tok kind = Tok::End;
    std::string text;
    Value number = 0;
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1;
};

struct SyntaxFailure
{
    Diagnostic diag;
};

class Lexer
{
public:
    Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size()) {
                t.kind = Tok::End;
                t.end_line = line_;
                t.end_col = col_;
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::Ident;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    t.text += advance();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                t.kind = Tok::Int;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    t.text += advance();
                auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
                if (ec != std::errc{})
                    fail(t, "integer literal `" + t.text + "` is too large");
            } else if (c == '"') {
                t.kind = Tok::String;
                advance();
                while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n')
                    t.text += advance();
                if (pos_ >= src_.size() || src_[pos_] != '"')
                    fail(t, "unterminated string literal");
                advance();
            } else {
                t.kind = Tok::Punct;
                t.text = punct(t);
                if (t.text == "and" || t.text == "or" || t.text == "not")
                    t.kind = Tok::Ident;
            }
            t.end_line = line_;
            t.end_col = col_;
            out.push_back(std::move(t));
        }
    }

private:
    char advance()
    {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            ++col_;
        }
        return c;
    }

    void skip_blank()
    {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
                advance();
            else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            else
                break;
        }
    }

    bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    std::string punct(const Token& t)
    {
        struct Alias
        {
            std::string_view in;
            const char* out;
        };
        static const Alias table[] = {
            {"<=>", "<=>"}, {"->", "->"}, {":=", ":="}, {"!=", "!="}, {"<=", "<="}, {">=", ">="}, {"=>", "=>"},
            {"..", ".."},   {"\xE2\x88\xA7", "and"}, {"\xE2\x88\xA8", "or"}, {"\xC2\xAC", "not"},
            {"\xE2\x87\x92", "=>"}, {"\xE2\x87\x94", "<=>"}, {"\xE2\x89\xA4", "<="}, {"\xE2\x89\xA5", ">="},
            {"\xE2\x89\xA0", "!="}, {"\xE2\x86\x92", "->"},
        };
        for (const auto& a : table)
            if (starts(a.in)) {
                for (size_t i = 0; i < a.in.size(); ++i)
                    advance();
                return a.out;
            }
        const char c = src_[pos_];
        if (std::string_view("{}():,;.=<>+-*").find(c) != std::string_view::npos) {
            advance();
            return std::string(1, c);
        }
        fail(t, std::string("unexpected character `") + c + "`");
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg)
    {
        throw SyntaxFailure{{Severity::Error, "SyntaxError", msg, {file_, t.line, t.col, line_, col_}}};
    }

    std::string_view src_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser
{
public:
    Parser(std::vector<Token> toks, std::string file) : toks_(std::move(toks)), file_(std::move(file)) {}

    Model model()
    {
        Model m;
        m.file = file_;
        expect_word("model");
        m.name = ident("model name");
        optional_semi();
        while (!at_end()) {
            if (is_word("refines")) {
                if (m.refines)
                    error_here("DuplicateDeclaration", "only one `refines` clause is allowed");
                m.refines = refines();
            } else if (is_word("context")) {
                m.contexts.push_back(context());
            } else if (is_word("connector")) {
                m.connectors.push_back(connector());
            } else if (is_word("component")) {
                m.components.push_back(component());
            } else {
                fail("expected `refines`, `context`, `connector` or `component`");
            }
            optional_semi();
        }
        return m;
    }

    RefinesDecl refines()
    {
        RefinesDecl r;
        r.span = span_here();
        expect_word("refines");
        if (peek().kind != Tok::String)
            fail("expected a quoted path after `refines`");
        r.path = next().text;
        if (accept("{")) {
            while (!accept("}")) {
                if (is_word("event")) {
                    EventMapping e;
                    e.span = span_here();
                    next();
                    e.concrete = qname();
                    expect("->");
                    e.abstract = is_word("new") ? next().text : qname();
                    r.events.push_back(std::move(e));
                } else if (is_word("state")) {
                    StateMapping s;
                    s.span = span_here();
                    next();
                    s.concrete = qname();
                    expect("->");
                    s.abstract = ident("abstract state");
                    r.states.push_back(std::move(s));
                } else if (is_word("glue")) {
                    next();
                    r.glue.push_back(expr());
                } else {
                    fail("expected `event`, `state` or `glue` in refines block");
                }
                optional_semi();
            }
        }
        return r;
    }

    bool at_end() const { return peek().kind == Tok::End; }

    std::vector<Diagnostic> extra; // non-fatal diagnostics (duplicates)

private:
    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    SourceSpan span_of(const Token& t) const { return {file_, t.line, t.col, t.end_line, t.end_col}; }
    SourceSpan span_here() const { return span_of(peek()); }

    [[noreturn]] void fail(const std::string& msg)
    {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "`" + t.text + "`";
        throw SyntaxFailure{{Severity::Error, "SyntaxError", msg + ", found " + found, span_of(t)}};
    }

    void error_here(const std::string& code, const std::string& msg)
    {
        extra.push_back({Severity::Error, code, msg, span_here()});
    }

    bool is(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
    bool is_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }
    bool accept(const char* p)
    {
        if (!is(p))
            return false;
        next();
        return true;
    }
    void expect(const char* p)
    {
        if (!accept(p))
            fail(std::string("expected `") + p + "`");
    }
    void expect_word(const char* w)
    {
        if (!is_word(w))
            fail(std::string("expected `") + w + "`");
        next();
    }
    void optional_semi()
    {
        while (accept(";")) {
        }
    }

    std::string ident(const char* what)
    {
        if (peek().kind != Tok::Ident)
            fail(std::string("expected ") + what);
        return next().text;
    }

    std::string qname()
    {
        std::string out = ident("name");
        while (accept("."))
            out += "." + ident("name");
        return out;
    }

    std::vector<std::string> ident_list()
    {
        std::vector<std::string> out{ident("name")};
        while (accept(","))
            out.push_back(ident("name"));
        return out;
    }

    ValueType type()
    {
        const std::string t = ident("type");
        if (t == "BOOL")
            return ValueType::boolean();
        if (t == "NAT")
            return ValueType::nat();
        if (t == "INT")
            return ValueType::integer();
        return ValueType::set(t);
    }

    Value signed_int()
    {
        const bool neg = accept("-");
        if (peek().kind != Tok::Int)
            fail("expected an integer");
        const Value v = next().number;
        return neg ? -v : v;
    }

    template <class T>
    void check_unique(const std::vector<T>& items, const char* what)
    {
        std::set<std::string> seen;
        for (const auto& it : items)
            if (!seen.insert(it.name).second)
                extra.push_back({Severity::Error, "DuplicateDeclaration",
                                 std::string(what) + " `" + it.name + "` declared twice", it.span});
    }

    Context context()
    {
        Context c;
        c.span = span_here();
        expect_word("context");
        c.name = ident("context name");
        if (is_word("extends")) {
            next();
            c.extends = ident("context name");
        }
        expect("{");
        while (!accept("}")) {
            if (is_word("set")) {
                CarrierSet s;
                s.span = span_here();
                next();
                s.name = ident("set name");
                expect("{");
                s.elements = ident_list();
                expect("}");
                c.sets.push_back(std::move(s));
            } else if (is_word("constant")) {
                Constant k;
                k.span = span_here();
                next();
                k.name = ident("constant name");
                expect(":");
                k.type = type();
                expect("=");
                k.value = expr();
                c.constants.push_back(std::move(k));
            } else if (is_word("axiom")) {
                next();
                c.axioms.push_back(expr());
            } else {
                fail("expected `set`, `constant` or `axiom`");
            }
            optional_semi();
        }
        check_unique(c.sets, "set");
        check_unique(c.constants, "constant");
        return c;
    }

    Connector connector()
    {
        Connector c;
        c.span = span_here();
        expect_word("connector");
        c.name = ident("connector name");
        expect(":");
        c.type = type();
        expect_word("from");
        c.source = ident("component name");
        expect_word("to");
        c.target = ident("component name");
        return c;
    }

    Component component()
    {
        Component c;
        c.span = span_here();
        expect_word("component");
        c.name = ident("component name");
        expect("{");
        while (!accept("}")) {
            if (is_word("var")) {
                Variable v;
                v.span = span_here();
                next();
                v.name = ident("variable name");
                expect(":");
                v.type = type();
                expect("=");
                v.init = expr();
                c.vars.push_back(std::move(v));
            } else if (is_word("variant")) {
                if (c.variant)
                    error_here("DuplicateDeclaration", "component `" + c.name + "` declares two variants");
                next();
                c.variant = expr();
            } else if (is_word("invariant")) {
                next();
                c.invariants.push_back(expr());
            } else if (is_word("statemachine")) {
                c.machines.push_back(machine());
            } else if (is_word("operation")) {
                c.operations.push_back(operation());
            } else {
                fail("expected `var`, `variant`, `invariant`, `statemachine` or `operation`");
            }
            optional_semi();
        }
        check_unique(c.vars, "variable");
        check_unique(c.operations, "operation");
        check_unique(c.machines, "state machine");
        return c;
    }

    void state(StateMachine& sm, int parent)
    {
        State s;
        s.span = span_here();
        expect_word("state");
        s.name = ident("state name");
        s.parent = parent;
        const int self = static_cast<int>(sm.states.size());
        sm.states.push_back(std::move(s));
        if (parent >= 0)
            sm.states[parent].children.push_back(self);
        if (!accept("{"))
            return;
        while (!accept("}")) {
            if (is_word("invariant")) {
                next();
                Expr e = expr();
                sm.states[self].invariants.push_back(std::move(e));
            } else if (is_word("initial")) {
                next();
                sm.states[self].initial = ident("state name");
            } else if (is_word("state")) {
                state(sm, self);
            } else {
                fail("expected `invariant`, `initial` or `state`");
            }
            optional_semi();
        }
    }

    void guards_and_actions(std::vector<Expr>& guards, std::vector<Action>& actions, Operation* op)
    {
        while (!accept("}")) {
            if (is_word("guard")) {
                next();
                guards.push_back(expr());
            } else if (is_word("action")) {
                next();
                actions.push_back(action());
            } else if (op && is_word("param")) {
                Param p;
                p.span = span_here();
                next();
                p.name = ident("parameter name");
                expect(":");
                p.type = type();
                if (is_word("in")) {
                    next();
                    p.lo = signed_int();
                    expect("..");
                    p.hi = signed_int();
                }
                op->params.push_back(std::move(p));
            } else {
                fail(op ? "expected `param`, `guard` or `action`" : "expected `guard` or `action`");
            }
            optional_semi();
        }
    }

    StateMachine machine()
    {
        StateMachine sm;
        sm.span = span_here();
        expect_word("statemachine");
        sm.name = ident("state machine name");
        if (is_word("sync"))
            sm.mode = MachineMode::Sync;
        else if (is_word("async"))
            sm.mode = MachineMode::Async;
        else
            fail("expected `sync` or `async`");
        next();
        expect("{");
        while (!accept("}")) {
            if (is_word("initial")) {
                const SourceSpan sp = span_here();
                next();
                sm.initial = ident("state name");
                if (is_word("links")) {
                    next();
                    sm.initial_link = ident("operation name");
                    Transition t;
                    t.name = "initial";
                    t.target = sm.initial;
                    t.link = sm.initial_link;
                    t.span = sp;
                    sm.transitions.insert(sm.transitions.begin(), std::move(t));
                }
            } else if (is_word("state")) {
                state(sm, -1);
            } else if (is_word("transition")) {
                Transition t;
                t.span = span_here();
                next();
                t.name = ident("transition name");
                expect(":");
                t.source = ident("source state");
                expect("->");
                t.target = ident("target state");
                if (is_word("links")) {
                    next();
                    t.link = ident("operation name");
                }
                if (accept("{"))
                    guards_and_actions(t.guards, t.actions, nullptr);
                sm.transitions.push_back(std::move(t));
            } else {
                fail("expected `initial`, `state` or `transition`");
            }
            optional_semi();
        }
        if (sm.initial.empty())
            extra.push_back({Severity::Error, "SyntaxError", "state machine `" + sm.name + "` has no `initial` state", sm.span});
        check_unique(sm.states, "state");
        check_unique(sm.transitions, "transition");
        return sm;
    }

    Operation operation()
    {
        Operation op;
        op.span = span_here();
        expect_word("operation");
        op.name = ident("operation name");
        expect_word("kind");
        const Token& k = peek();
        auto kind = k.kind == Tok::Ident ? kind_from_letter(k.text) : std::nullopt;
        if (!kind)
            throw SyntaxFailure{{Severity::Error, "SyntaxError",
                                 "unknown operation kind `" + k.text + "`; allowed kinds are P, S, E, T, M", span_of(k)}};
        next();
        op.kind = *kind;
        if (is_word("wakes")) {
            next();
            op.wakes = ident_list();
        }
        if (accept("{"))
            guards_and_actions(op.guards, op.actions, &op);
        check_unique(op.params, "parameter");
        return op;
    }

    Action action()
    {
        Action a;
        a.span = span_here();
        if (is_word("port_send")) {
            next();
            a.kind = ActionKind::PortSend;
            expect("(");
            a.target = ident("connector name");
            expect(",");
            a.value = expr();
            expect(",");
            expect_word("delay");
            a.delay = expr();
            expect(")");
        } else if (is_word("self_wake")) {
            next();
            a.kind = ActionKind::SelfWake;
            expect("(");
            if (!is_word("delay")) {
                a.target = ident("wake kind");
                expect(",");
            }
            expect_word("delay");
            a.delay = expr();
            expect(")");
        } else if (is_word("call")) {
            next();
            a.kind = ActionKind::Call;
            a.target = ident("method name");
        } else {
            a.kind = ActionKind::Assign;
            a.target = ident("action");
            expect(":=");
            a.value = expr();
        }
        return a;
    }

    // Expressions -----------------------------------------------------------

    Expr located(Expr e, const Token& start)
    {
        const Token& last = toks_[pos_ > 0 ? pos_ - 1 : 0];
        e.span = {file_, start.line, start.col, last.end_line, last.end_col};
        return e;
    }

    Expr expr() { return iff(); }

    Expr iff()
    {
        const Token start = peek();
        Expr l = implies();
        if (accept("<=>")) {
            Expr r = implies();
            l = located(Expr::binary(BinOp::Iff, std::move(l), std::move(r)), start);
            if (is("<=>"))
                fail("`<=>` is non-associative; add parentheses");
        }
        return l;
    }

    Expr implies()
    {
        const Token start = peek();
        Expr l = disj();
        if (accept("=>"))
            return located(Expr::binary(BinOp::Implies, std::move(l), implies()), start);
        return l;
    }

    Expr disj()
    {
        const Token start = peek();
        Expr l = conj();
        while (is_word("or")) {
            next();
            l = located(Expr::binary(BinOp::Or, std::move(l), conj()), start);
        }
        return l;
    }

    Expr conj()
    {
        const Token start = peek();
        Expr l = negation();
        while (is_word("and")) {
            next();
            l = located(Expr::binary(BinOp::And, std::move(l), negation()), start);
        }
        return l;
    }

    Expr negation()
    {
        const Token start = peek();
        if (is_word("not")) {
            next();
            return located(Expr::unary(UnOp::Not, negation()), start);
        }
        return comparison();
    }

    std::optional<BinOp> comparison_op() const
    {
        static const std::pair<const char*, BinOp> ops[] = {{"=", BinOp::Eq},  {"!=", BinOp::Ne}, {"<", BinOp::Lt},
                                                            {"<=", BinOp::Le}, {">", BinOp::Gt},  {">=", BinOp::Ge}};
        for (const auto& [s, op] : ops)
            if (is(s))
                return op;
        return std::nullopt;
    }

    Expr comparison()
    {
        const Token start = peek();
        Expr l = additive();
        if (auto op = comparison_op()) {
            next();
            l = located(Expr::binary(*op, std::move(l), additive()), start);
            if (comparison_op())
                fail("comparisons are non-associative; add parentheses");
        }
        return l;
    }

    Expr additive()
    {
        const Token start = peek();
        Expr l = multiplicative();
        while (is("+") || is("-")) {
            const BinOp op = next().text == "+" ? BinOp::Add : BinOp::Sub;
            l = located(Expr::binary(op, std::move(l), multiplicative()), start);
        }
        return l;
    }

    Expr multiplicative()
    {
        const Token start = peek();
        Expr l = unary();
        while (accept("*"))
            l = located(Expr::binary(BinOp::Mul, std::move(l), unary()), start);
        return l;
    }

    Expr unary()
    {
        const Token start = peek();
        if (accept("-")) {
            return located(Expr::unary(UnOp::Neg, unary()), start);
        }
        return primary();
    }

    std::vector<std::string> path()
    {
        std::vector<std::string> p{ident("name")};
        while (accept("."))
            p.push_back(ident("name"));
        return p;
    }

    Expr primary()
    {
        const Token start = peek();
        if (accept("(")) {
            Expr e = expr();
            expect(")");
            return e;
        }
        if (start.kind == Tok::Int) {
            next();
            return located(Expr::number(start.number), start);
        }
        if (start.kind != Tok::Ident)
            fail("expected an expression");
        const std::string& w = start.text;
        if (w == "TRUE" || w == "true" || w == "FALSE" || w == "false") {
            next();
            return located(Expr::boolean(w == "TRUE" || w == "true"), start);
        }
        if ((w == "in" || w == "recv") && peek(1).kind == Tok::Punct && peek(1).text == "(") {
            next();
            next();
            Expr e;
            e.kind = w == "in" ? ExprKind::InState : ExprKind::Recv;
            e.path = path();
            if (e.path.size() > 1 && e.path[0] == "abs" && e.kind == ExprKind::InState) {
                e.abstract_side = true;
                e.path.erase(e.path.begin());
            }
            expect(")");
            return located(std::move(e), start);
        }
        if ((w == "min" || w == "max") && peek(1).kind == Tok::Punct && peek(1).text == "(") {
            next();
            next();
            Expr e;
            e.kind = ExprKind::MinMax;
            e.is_max = w == "max";
            e.args.push_back(expr());
            while (accept(","))
                e.args.push_back(expr());
            expect(")");
            return located(std::move(e), start);
        }
        static const std::set<std::string> reserved = {"and", "or", "not", "guard", "action", "param", "in"};
        if (reserved.count(w))
            fail("expected an expression");
        Expr e = Expr::name(path());
        if (e.path.size() > 1 && e.path[0] == "abs") {
            e.abstract_side = true;
            e.path.erase(e.path.begin());
        }
        return located(std::move(e), start);
    }

    std::vector<Token> toks_;
    std::string file_;
    size_t pos_ = 0;
};

// Printer -------------------------------------------------------------------

void print_action(std::ostream& os, const Action& a)
{
    switch (a.kind) {
    case ActionKind::Assign:
        os << a.target << " := " << to_string(a.value);
        break;
    case ActionKind::PortSend:
        os << "port_send(" << a.target << ", " << to_string(a.value) << ", delay " << to_string(a.delay) << ')';
        break;
    case ActionKind::SelfWake:
        os << "self_wake(";
        if (!a.target.empty())
            os << a.target << ", ";
        os << "delay " << to_string(a.delay) << ')';
        break;
    case ActionKind::Call:
        os << "call " << a.target;
        break;
    }
}

void print_body(std::ostream& os, const std::string& ind, const std::vector<Expr>& guards,
                const std::vector<Action>& actions, const std::vector<Param>* params)
{
    if (params)
        for (const auto& p : *params) {
            os << ind << "param " << p.name << " : " << p.type.str();
            if (p.lo && p.hi)
                os << " in " << *p.lo << ".." << *p.hi;
            os << '\n';
        }
    for (const auto& g : guards)
        os << ind << "guard " << to_string(g) << '\n';
    for (const auto& a : actions) {
        os << ind << "action ";
        print_action(os, a);
        os << '\n';
    }
}

void print_state(std::ostream& os, const StateMachine& sm, int s, const std::string& ind)
{
    const State& st = sm.states[s];
    os << ind << "state " << st.name;
    if (st.invariants.empty() && st.children.empty() && st.initial.empty()) {
        os << '\n';
        return;
    }
    os << " {\n";
    for (const auto& inv : st.invariants)
        os << ind << "    invariant " << to_string(inv) << '\n';
    if (!st.initial.empty())
        os << ind << "    initial " << st.initial << '\n';
    for (int c : st.children)
        print_state(os, sm, c, ind + "    ");
    os << ind << "}\n";
}

} // namespace

ParseResult parse(std::string_view text, const std::string& file)
{
    ParseResult res;
    try {
        Parser p(Lexer(text, file).run(), file);
        Model m = p.model();
        res.diagnostics = std::move(p.extra);
        if (!has_errors(res.diagnostics))
            res.model = std::move(m);
    } catch (const SyntaxFailure& f) {
        res.diagnostics.push_back(f.diag);
    }
    return res;
}

std::optional<RefinesDecl> parse_refines(std::string_view text, const std::string& file, Diagnostics& out)
{
    try {
        Parser p(Lexer(text, file).run(), file);
        RefinesDecl r = p.refines();
        while (!p.at_end())
            throw SyntaxFailure{{Severity::Error, "SyntaxError", "trailing input after refines block", {file}}};
        out.insert(out.end(), p.extra.begin(), p.extra.end());
        return r;
    } catch (const SyntaxFailure& f) {
        out.push_back(f.diag);
        return std::nullopt;
    }
}

Model parse_or_throw(std::string_view text, const std::string& file)
{
    auto res = parse(text, file);
    if (!res.model)
        throw DiagnosticError(std::move(res.diagnostics));
    return std::move(*res.model);
}

std::string print(const Model& m)
{
    std::ostringstream os;
    os << "model " << m.name << '\n';
    if (m.refines) {
        const auto& r = *m.refines;
        os << "\nrefines \"" << r.path << '"';
        if (!r.events.empty() || !r.states.empty() || !r.glue.empty()) {
            os << " {\n";
            for (const auto& e : r.events)
                os << "    event " << e.concrete << " -> " << e.abstract << '\n';
            for (const auto& s : r.states)
                os << "    state " << s.concrete << " -> " << s.abstract << '\n';
            for (const auto& g : r.glue)
                os << "    glue " << to_string(g) << '\n';
            os << '}';
        }
        os << '\n';
    }
    for (const auto& c : m.contexts) {
        os << "\ncontext " << c.name;
        if (!c.extends.empty())
            os << " extends " << c.extends;
        os << " {\n";
        for (const auto& s : c.sets) {
            os << "    set " << s.name << " { ";
            for (size_t i = 0; i < s.elements.size(); ++i)
                os << (i ? ", " : "") << s.elements[i];
            os << " }\n";
        }
        for (const auto& k : c.constants)
            os << "    constant " << k.name << " : " << k.type.str() << " = " << to_string(k.value) << '\n';
        for (const auto& a : c.axioms)
            os << "    axiom " << to_string(a) << '\n';
        os << "}\n";
    }
    if (!m.connectors.empty())
        os << '\n';
    for (const auto& c : m.connectors)
        os << "connector " << c.name << " : " << c.type.str() << " from " << c.source << " to " << c.target << '\n';
    for (const auto& c : m.components) {
        os << "\ncomponent " << c.name << " {\n";
        for (const auto& v : c.vars)
            os << "    var " << v.name << " : " << v.type.str() << " = " << to_string(v.init) << '\n';
        if (c.variant)
            os << "    variant " << to_string(*c.variant) << '\n';
        for (const auto& inv : c.invariants)
            os << "    invariant " << to_string(inv) << '\n';
        for (const auto& sm : c.machines) {
            os << "    statemachine " << sm.name << (sm.mode == MachineMode::Sync ? " sync" : " async") << " {\n";
            os << "        initial " << sm.initial;
            if (!sm.initial_link.empty())
                os << " links " << sm.initial_link;
            os << '\n';
            for (size_t s = 0; s < sm.states.size(); ++s)
                if (sm.states[s].parent < 0)
                    print_state(os, sm, static_cast<int>(s), "        ");
            for (const auto& t : sm.transitions) {
                if (t.is_initial())
                    continue;
                os << "        transition " << t.name << " : " << t.source << " -> " << t.target;
                if (!t.link.empty())
                    os << " links " << t.link;
                if (!t.guards.empty() || !t.actions.empty()) {
                    os << " {\n";
                    print_body(os, "            ", t.guards, t.actions, nullptr);
                    os << "        }";
                }
                os << '\n';
            }
            os << "    }\n";
        }
        for (const auto& op : c.operations) {
            os << "    operation " << op.name << " kind " << kind_letter(op.kind);
            if (!op.wakes.empty()) {
                os << " wakes ";
                for (size_t i = 0; i < op.wakes.size(); ++i)
                    os << (i ? ", " : "") << op.wakes[i];
            }
            if (!op.params.empty() || !op.guards.empty() || !op.actions.empty()) {
                os << " {\n";
                print_body(os, "        ", op.guards, op.actions, &op.params);
                os << "    }";
            }
            os << '\n';
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace coda

namespace coda {

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string model_hash(const Model& m)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(print(m))));
    return buf;
}

} // namespace coda
