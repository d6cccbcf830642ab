#include "slsm/predicate.hpp"

namespace slsm {

namespace {

int cmp_values(const Value& a, const Value& b) {
    if (a.index() != b.index()) throw EncodingError("comparing values of different types");
    if (a < b) return -1;
    if (b < a) return 1;
    return 0;
}

bool cond_holds(CmpOp op, const Value& lhs, const Value& rhs) {
    const int c = cmp_values(lhs, rhs);
    switch (op) {
        case CmpOp::Eq: return c == 0;
        case CmpOp::Lt: return c < 0;
        case CmpOp::Le: return c <= 0;
        case CmpOp::Gt: return c > 0;
        default: return c >= 0;
    }
}

Key end_or_inf(const std::optional<Key>& k) { return k ? *k : Key{}; }

}  // namespace

bool Predicate::matches(const TableDescriptor& t, const RowValue& row) const {
    for (const Condition& c : conds) {
        const int idx = t.col_index(c.column);
        if (idx < 0) throw CatalogError("predicate column not in " + t.name + ": " + c.column);
        if (!cond_holds(c.op, row.columns[static_cast<size_t>(idx)], c.literal)) return false;
    }
    return true;
}

KeyInterval table_interval(const TableDescriptor& t) {
    const TableId region = t.key_mode.prefixed ? t.key_mode.parent_tid : t.id;
    return {keycodec::table_region_start(region), keycodec::table_region_end(region)};
}

KeyInterval scan_interval(const Catalog& cat, const TableDescriptor& t, const Predicate& p) {
    (void)cat;
    const TableId region = t.key_mode.prefixed ? t.key_mode.parent_tid : t.id;
    Key prefix;
    keycodec::append_table_id(prefix.b, region);
    const size_t limit = t.key_mode.prefixed ? t.key_mode.prefix_cols : t.pk.size();

    for (size_t i = 0; i < limit; ++i) {
        const std::string& col = t.columns[t.pk[i]].name;
        const Condition* eq = nullptr;
        std::optional<int64_t> lo, hi;
        for (const Condition& c : p.conds) {
            if (c.column != col) continue;
            if (c.op == CmpOp::Eq) {
                eq = &c;
                break;
            }
            if (!std::holds_alternative<int64_t>(c.literal)) continue;
            const int64_t v = std::get<int64_t>(c.literal);
            if (c.op == CmpOp::Ge) lo = lo ? std::max(*lo, v) : v;
            if (c.op == CmpOp::Gt) lo = lo ? std::max(*lo, v + 1) : v + 1;
            if (c.op == CmpOp::Le) hi = hi ? std::min(*hi, v) : v;
            if (c.op == CmpOp::Lt) hi = hi ? std::min(*hi, v - 1) : v - 1;
        }
        if (eq) {
            keycodec::append_value(prefix.b, eq->literal);
            continue;
        }
        if (lo || hi) {
            KeyInterval out;
            if (lo) {
                out.start = prefix;
                keycodec::append_value(out.start.b, Value{*lo});
            } else {
                out.start = prefix;
            }
            if (hi) {
                Key h = prefix;
                keycodec::append_value(h.b, Value{*hi});
                out.end = end_or_inf(keycodec::prefix_end(h));
            } else {
                out.end = end_or_inf(keycodec::prefix_end(prefix));
            }
            return out;
        }
        break;
    }
    return {prefix, end_or_inf(keycodec::prefix_end(prefix))};
}

}  // namespace slsm
