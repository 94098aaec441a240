#include "coda/model.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace coda {

std::string SourceSpan::str() const
{
    std::ostringstream os;
    os << (file.empty() ? "<input>" : file) << ':' << start_line << ':' << start_col;
    return os.str();
}

std::string Diagnostic::str() const
{
    return span.str() + ": " + (severity == Severity::Error ? "error" : "warning") + " [" + code + "] " + message;
}

bool has_errors(const Diagnostics& diags)
{
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format(const Diagnostics& diags)
{
    std::string out;
    for (const auto& d : diags) {
        out += d.str();
        out += '\n';
    }
    return out;
}

std::string ValueType::str() const
{
    switch (base) {
    case BaseType::Bool:
        return "BOOL";
    case BaseType::Nat:
        return "NAT";
    case BaseType::Int:
        return "INT";
    case BaseType::Set:
        return set_name;
    }
    return "?";
}

bool assignable(const ValueType& to, const ValueType& from)
{
    if (to.numeric() && from.numeric())
        return true;
    return to == from;
}

Expr Expr::boolean(bool b)
{
    Expr e;
    e.kind = ExprKind::BoolLit;
    e.literal = b ? 1 : 0;
    return e;
}

Expr Expr::number(Value v)
{
    Expr e;
    e.kind = ExprKind::IntLit;
    e.literal = v;
    return e;
}

Expr Expr::name(std::vector<std::string> path)
{
    Expr e;
    e.kind = ExprKind::Name;
    e.path = std::move(path);
    return e;
}

Expr Expr::unary(UnOp op, Expr x)
{
    Expr e;
    e.kind = ExprKind::Unary;
    e.un = op;
    e.args.push_back(std::move(x));
    return e;
}

Expr Expr::binary(BinOp op, Expr l, Expr r)
{
    Expr e;
    e.kind = ExprKind::Binary;
    e.bin = op;
    e.args.push_back(std::move(l));
    e.args.push_back(std::move(r));
    return e;
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case ExprKind::BoolLit:
    case ExprKind::IntLit:
        return a.literal == b.literal;
    case ExprKind::Name:
    case ExprKind::InState:
    case ExprKind::Recv:
        return a.path == b.path && a.abstract_side == b.abstract_side;
    case ExprKind::Unary:
        return a.un == b.un && a.args == b.args;
    case ExprKind::Binary:
        return a.bin == b.bin && a.args == b.args;
    case ExprKind::MinMax:
        return a.is_max == b.is_max && a.args == b.args;
    }
    return false;
}

const char* to_string(BinOp op)
{
    switch (op) {
    case BinOp::Add:
        return "+";
    case BinOp::Sub:
        return "-";
    case BinOp::Mul:
        return "*";
    case BinOp::Eq:
        return "=";
    case BinOp::Ne:
        return "!=";
    case BinOp::Lt:
        return "<";
    case BinOp::Le:
        return "<=";
    case BinOp::Gt:
        return ">";
    case BinOp::Ge:
        return ">=";
    case BinOp::And:
        return "and";
    case BinOp::Or:
        return "or";
    case BinOp::Implies:
        return "=>";
    case BinOp::Iff:
        return "<=>";
    }
    return "?";
}

namespace {

// Binding strength, higher binds tighter. Must agree with the parser.
int precedence(const Expr& e)
{
    if (e.kind == ExprKind::Unary)
        return e.un == UnOp::Not ? 4 : 8;
    if (e.kind != ExprKind::Binary)
        return 9;
    switch (e.bin) {
    case BinOp::Iff:
        return 0;
    case BinOp::Implies:
        return 1;
    case BinOp::Or:
        return 2;
    case BinOp::And:
        return 3;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
        return 5;
    case BinOp::Add:
    case BinOp::Sub:
        return 6;
    case BinOp::Mul:
        return 7;
    }
    return 9;
}

std::string joined(const std::vector<std::string>& path, bool abs)
{
    std::string out = abs ? "abs" : "";
    for (const auto& p : path) {
        if (!out.empty())
            out += '.';
        out += p;
    }
    return out;
}

void print(std::ostream& os, const Expr& e);

void print_child(std::ostream& os, const Expr& child, int parent_prec, bool wrap_equal)
{
    const int p = precedence(child);
    const bool paren = p < parent_prec || (wrap_equal && p == parent_prec);
    if (paren)
        os << '(';
    print(os, child);
    if (paren)
        os << ')';
}

void print(std::ostream& os, const Expr& e)
{
    switch (e.kind) {
    case ExprKind::BoolLit:
        os << (e.literal ? "TRUE" : "FALSE");
        return;
    case ExprKind::IntLit:
        os << e.literal;
        return;
    case ExprKind::Name:
        os << joined(e.path, e.abstract_side);
        return;
    case ExprKind::InState:
        os << "in(" << joined(e.path, e.abstract_side) << ')';
        return;
    case ExprKind::Recv:
        os << "recv(" << joined(e.path, false) << ')';
        return;
    case ExprKind::Unary:
        os << (e.un == UnOp::Not ? "not " : "-");
        print_child(os, e.args[0], precedence(e), false);
        return;
    case ExprKind::MinMax:
        os << (e.is_max ? "max(" : "min(");
        for (size_t i = 0; i < e.args.size(); ++i) {
            if (i)
                os << ", ";
            print(os, e.args[i]);
        }
        os << ')';
        return;
    case ExprKind::Binary: {
        const int p = precedence(e);
        const bool right_assoc = e.bin == BinOp::Implies;
        const bool non_assoc = p == 5 || e.bin == BinOp::Iff;
        print_child(os, e.args[0], p, right_assoc || non_assoc);
        os << ' ' << to_string(e.bin) << ' ';
        print_child(os, e.args[1], p, !right_assoc || non_assoc);
        return;
    }
    }
}

} // namespace

std::string to_string(const Expr& e)
{
    std::ostringstream os;
    print(os, e);
    return os.str();
}

char kind_letter(OpKind k)
{
    switch (k) {
    case OpKind::P:
        return 'P';
    case OpKind::S:
        return 'S';
    case OpKind::E:
        return 'E';
    case OpKind::T:
        return 'T';
    case OpKind::M:
        return 'M';
    }
    return '?';
}

std::optional<OpKind> kind_from_letter(const std::string& s)
{
    if (s == "P")
        return OpKind::P;
    if (s == "S")
        return OpKind::S;
    if (s == "E")
        return OpKind::E;
    if (s == "T")
        return OpKind::T;
    if (s == "M")
        return OpKind::M;
    return std::nullopt;
}

int StateMachine::find_state(const std::string& n) const
{
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i].name == n)
            return static_cast<int>(i);
    return -1;
}

bool StateMachine::within(int s, int ancestor) const
{
    while (s >= 0) {
        if (s == ancestor)
            return true;
        s = states[s].parent;
    }
    return false;
}

int StateMachine::enter(int s) const
{
    while (s >= 0 && !states[s].children.empty()) {
        if (states[s].initial_child < 0)
            return -1;
        s = states[s].initial_child;
    }
    return s;
}

int Component::find_var(const std::string& n) const
{
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == n)
            return static_cast<int>(i);
    return -1;
}

int Component::find_op(const std::string& n) const
{
    for (size_t i = 0; i < operations.size(); ++i)
        if (operations[i].name == n)
            return static_cast<int>(i);
    return -1;
}

int Component::find_machine(const std::string& n) const
{
    for (size_t i = 0; i < machines.size(); ++i)
        if (machines[i].name == n)
            return static_cast<int>(i);
    return -1;
}

int Model::find_component(const std::string& n) const
{
    for (size_t i = 0; i < components.size(); ++i)
        if (components[i].name == n)
            return static_cast<int>(i);
    return -1;
}

int Model::find_connector(const std::string& n) const
{
    for (size_t i = 0; i < connectors.size(); ++i)
        if (connectors[i].name == n)
            return static_cast<int>(i);
    return -1;
}

std::string render_value(const Model& m, const ValueType& t, Value v)
{
    switch (t.base) {
    case BaseType::Bool:
        return v ? "TRUE" : "FALSE";
    case BaseType::Set:
        if (t.set_index >= 0 && t.set_index < static_cast<int>(m.sets.size())) {
            const auto& els = m.sets[t.set_index].elements;
            if (v >= 0 && v < static_cast<Value>(els.size()))
                return els[v];
        }
        return "#" + std::to_string(v);
    default:
        return std::to_string(v);
    }
}

std::optional<Value> parse_value(const Model& m, const ValueType& t, const std::string& text)
{
    switch (t.base) {
    case BaseType::Bool:
        if (text == "TRUE")
            return 1;
        if (text == "FALSE")
            return 0;
        return std::nullopt;
    case BaseType::Set: {
        if (t.set_index < 0)
            return std::nullopt;
        const auto& els = m.sets[t.set_index].elements;
        auto it = std::find(els.begin(), els.end(), text);
        if (it == els.end())
            return std::nullopt;
        return static_cast<Value>(it - els.begin());
    }
    case BaseType::Nat:
    case BaseType::Int: {
        Value v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size())
            return std::nullopt;
        if (t.base == BaseType::Nat && v < 0)
            return std::nullopt;
        return v;
    }
    }
    return std::nullopt;
}

std::vector<Value> domain_of(const Model& m, const ValueType& t, std::optional<Value> lo, std::optional<Value> hi)
{
    std::vector<Value> out;
    switch (t.base) {
    case BaseType::Bool:
        out = {0, 1};
        break;
    case BaseType::Set:
        if (t.set_index >= 0)
            for (size_t i = 0; i < m.sets[t.set_index].elements.size(); ++i)
                out.push_back(static_cast<Value>(i));
        break;
    default:
        if (lo && hi)
            for (Value v = *lo; v <= *hi; ++v)
                out.push_back(v);
        break;
    }
    return out;
}

} // namespace coda
