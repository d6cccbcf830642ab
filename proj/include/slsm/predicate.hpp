#pragma once

#include <map>
#include <string>
#include <vector>

#include "slsm/catalog.hpp"

namespace slsm {

enum class CmpOp { Eq, Lt, Le, Gt, Ge };

struct Condition {
    std::string column;
    CmpOp op = CmpOp::Eq;
    Value literal;
};

// Conjunction of comparisons; an empty conjunction is a tautology.
struct Predicate {
    std::vector<Condition> conds;

    static Predicate all() { return {}; }
    static Predicate eq(const std::string& col, Value v) {
        return Predicate{{Condition{col, CmpOp::Eq, std::move(v)}}};
    }
    Predicate& with_eq(const std::string& col, Value v) {
        conds.push_back(Condition{col, CmpOp::Eq, std::move(v)});
        return *this;
    }
    Predicate& with_cmp(const std::string& col, CmpOp op, Value v) {
        conds.push_back(Condition{col, op, std::move(v)});
        return *this;
    }

    bool is_tautology() const { return conds.empty(); }
    bool matches(const TableDescriptor& t, const RowValue& row) const;
};

struct KeyInterval {
    Key start;
    Key end;  // exclusive; empty bytes mean +inf

    bool contains(const Key& k) const {
        return !(k < start) && (end.b.empty() || k < end);
    }
    bool overlaps(const KeyInterval& o) const {
        bool this_before = !end.b.empty() && !(o.start < end);
        bool other_before = !o.end.b.empty() && !(start < o.end);
        return !(this_before || other_before);
    }
};

// Smallest key interval guaranteed to cover every row of `t` matching `p`.
// Leading pk equalities tighten the interval; a range comparison on the next
// pk column tightens it further; everything else widens to the table region.
KeyInterval scan_interval(const Catalog& cat, const TableDescriptor& t, const Predicate& p);

// Interval of the whole table region ([parent region] for prefixed tables).
KeyInterval table_interval(const TableDescriptor& t);

}  // namespace slsm
