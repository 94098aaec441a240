#pragma once

// Expression evaluation over an environment. An environment supplies
//
//   Value var(const Expr& name) const;                 // RefKind::Var
//   Value param(int index) const;                      // RefKind::Param
//   std::optional<Value> recv(int connector) const;    // nullopt: nothing received yet
//   bool in_state(const Expr& test) const;             // ExprKind::InState
//   Value bound() const;                               // overflow bound
//
// Constants and carrier elements are read from the model directly.
// A missing receive value makes the enclosing expression undefined
// (nullopt); guards treat undefined as false.

#include "coda/model.hpp"

#include <optional>

namespace coda {

[[noreturn]] void throw_overflow(const Expr& e, Value bound);

template <class Env>
std::optional<Value> evaluate(const Model& m, const Expr& e, const Env& env)
{
    auto checked = [&](Value v) -> Value {
        if (v > env.bound() || v < -env.bound())
            throw_overflow(e, env.bound());
        return v;
    };
    switch (e.kind) {
    case ExprKind::BoolLit:
    case ExprKind::IntLit:
        return e.literal;
    case ExprKind::Name:
        switch (e.ref) {
        case RefKind::Var:
            return env.var(e);
        case RefKind::Param:
            return env.param(e.index);
        case RefKind::Const:
            return m.consts[e.index].value;
        case RefKind::Element:
            return e.index;
        case RefKind::Unresolved:
            break;
        }
        return std::nullopt;
    case ExprKind::InState:
        return env.in_state(e) ? 1 : 0;
    case ExprKind::Recv:
        return env.recv(e.index);
    case ExprKind::Unary: {
        auto v = evaluate(m, e.args[0], env);
        if (!v)
            return std::nullopt;
        return e.un == UnOp::Not ? Value(!*v) : checked(-*v);
    }
    case ExprKind::MinMax: {
        std::optional<Value> best;
        for (const auto& a : e.args) {
            auto v = evaluate(m, a, env);
            if (!v)
                return std::nullopt;
            if (!best || (e.is_max ? *v > *best : *v < *best))
                best = v;
        }
        return best;
    }
    case ExprKind::Binary: {
        auto l = evaluate(m, e.args[0], env);
        // Short-circuit boolean connectives on a decided left operand.
        if (l) {
            if (e.bin == BinOp::And && !*l)
                return 0;
            if (e.bin == BinOp::Or && *l)
                return 1;
            if (e.bin == BinOp::Implies && !*l)
                return 1;
        }
        auto r = evaluate(m, e.args[1], env);
        if (!l || !r)
            return std::nullopt;
        const Value a = *l;
        const Value b = *r;
        switch (e.bin) {
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul: {
            Value out = 0;
            const bool wrapped = e.bin == BinOp::Add   ? __builtin_add_overflow(a, b, &out)
                                 : e.bin == BinOp::Sub ? __builtin_sub_overflow(a, b, &out)
                                                       : __builtin_mul_overflow(a, b, &out);
            if (wrapped)
                throw_overflow(e, env.bound());
            return checked(out);
        }
        case BinOp::Eq:
            return a == b;
        case BinOp::Ne:
            return a != b;
        case BinOp::Lt:
            return a < b;
        case BinOp::Le:
            return a <= b;
        case BinOp::Gt:
            return a > b;
        case BinOp::Ge:
            return a >= b;
        case BinOp::And:
            return a && b;
        case BinOp::Or:
            return a || b;
        case BinOp::Implies:
            return !a || b;
        case BinOp::Iff:
            return (a != 0) == (b != 0);
        }
        return std::nullopt;
    }
    }
    return std::nullopt;
}

} // namespace coda
