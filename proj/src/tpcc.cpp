#include "slsm/tpcc.hpp"

namespace slsm {
namespace tpcc {

Cardinalities cardinalities(int scale) {
    if (scale < 1) throw ConfigError("scale factor must be >= 1");
    Cardinalities c;
    c.warehouses = scale;
    return c;
}

namespace {

void put_row(Engine& eng, TableId tid, std::vector<Value> cols) {
    const TableDescriptor& t = eng.catalog().table(tid);
    RowValue row{std::move(cols)};
    Key k = eng.catalog().row_key(t, row);
    eng.store().put(k, std::move(row));
}

}  // namespace

Tables load(Engine& eng, int scale, uint64_t seed) {
    Cardinalities card = cardinalities(scale);
    Catalog& cat = eng.catalog();
    Tables t;

    t.warehouse = cat.add_table("warehouse",
                                {{"w_id", ColType::Int}, {"w_name", ColType::Str},
                                 {"w_ytd", ColType::Dec}},
                                {"w_id"});
    t.district = cat.add_table("district",
                               {{"d_w_id", ColType::Int}, {"d_id", ColType::Int},
                                {"d_name", ColType::Str}, {"d_ytd", ColType::Dec}},
                               {"d_w_id", "d_id"});
    t.customer = cat.add_table(
        "customer",
        {{"c_w_id", ColType::Int}, {"c_d_id", ColType::Int}, {"c_id", ColType::Int},
         {"c_name", ColType::Str}, {"c_credit", ColType::Str}, {"c_payment", ColType::Dec},
         {"c_balance", ColType::Dec}, {"c_state", ColType::Str}, {"c_city", ColType::Str},
         {"c_street", ColType::Str}},
        {"c_w_id", "c_d_id", "c_id"});
    t.oorder = cat.add_table("oorder",
                             {{"o_w_id", ColType::Int}, {"o_d_id", ColType::Int},
                              {"o_id", ColType::Int}, {"o_c_id", ColType::Int},
                              {"o_ol_cnt", ColType::Int}},
                             {"o_w_id", "o_d_id", "o_id"});
    t.order_line = cat.add_table(
        "order_line",
        {{"ol_w_id", ColType::Int}, {"ol_d_id", ColType::Int}, {"ol_o_id", ColType::Int},
         {"ol_number", ColType::Int}, {"ol_i_id", ColType::Int}, {"ol_qty", ColType::Int},
         {"ol_amount", ColType::Dec}},
        {"ol_w_id", "ol_d_id", "ol_o_id", "ol_number"});
    t.stock = cat.add_table("stock",
                            {{"s_w_id", ColType::Int}, {"s_i_id", ColType::Int},
                             {"s_quantity", ColType::Int}, {"s_order_cnt", ColType::Int},
                             {"s_ytd", ColType::Dec}},
                            {"s_w_id", "s_i_id"});

    Rng rng(seed);
    for (int w = 1; w <= card.warehouses; ++w) {
        put_row(eng, t.warehouse, {int64_t{w}, "wh_" + std::to_string(w), Dec{0}});
        for (int i = 1; i <= card.items_per_wh; ++i) {
            put_row(eng, t.stock,
                    {int64_t{w}, int64_t{i}, rng.range(10, 100), int64_t{0}, Dec{0}});
        }
        for (int d = 1; d <= card.districts_per_wh; ++d) {
            put_row(eng, t.district,
                    {int64_t{w}, int64_t{d},
                     "dist_" + std::to_string(w) + "_" + std::to_string(d), Dec{0}});
            for (int c = 1; c <= card.customers_per_district; ++c) {
                put_row(eng, t.customer,
                        {int64_t{w}, int64_t{d}, int64_t{c}, "cust_" + std::to_string(c),
                         std::string(c % 10 == 0 ? "BC" : "GC"), Dec{0},
                         Dec{rng.range(-5000, 500000)}, "st_" + std::to_string(c % 50),
                         "city_" + std::to_string(c % 100), "str_" + std::to_string(c)});
            }
            for (int o = 1; o <= card.orders_per_district; ++o) {
                int64_t cnt = rng.range(card.min_ol, card.max_ol);
                put_row(eng, t.oorder,
                        {int64_t{w}, int64_t{d}, int64_t{o},
                         rng.range(1, card.customers_per_district), cnt});
                for (int64_t ol = 1; ol <= cnt; ++ol) {
                    put_row(eng, t.order_line,
                            {int64_t{w}, int64_t{d}, int64_t{o}, ol,
                             rng.range(1, card.items_per_wh), rng.range(1, 10),
                             Dec{rng.range(100, 9999)}});
                }
            }
        }
    }

    // ranges: one per small table, per-district grain for the big tables,
    // per-warehouse quarters for stock; leases round-robin over the nodes
    auto split_at = [&](TableId tid, std::vector<Value> prefix) {
        eng.cluster().split_range(keycodec::encode_key(tid, prefix));
    };
    for (TableId tid : {t.warehouse, t.district, t.customer, t.oorder, t.order_line, t.stock}) {
        eng.cluster().split_range(keycodec::table_region_start(tid));
    }
    eng.cluster().split_range(keycodec::table_region_end(t.stock));
    for (int w = 1; w <= card.warehouses; ++w) {
        for (int d = 1; d <= card.districts_per_wh; ++d) {
            if (w == 1 && d == 1) continue;
            split_at(t.customer, {int64_t{w}, int64_t{d}});
            split_at(t.oorder, {int64_t{w}, int64_t{d}});
            split_at(t.order_line, {int64_t{w}, int64_t{d}});
        }
        for (int i : {251, 501, 751}) {
            if (i <= card.items_per_wh) split_at(t.stock, {int64_t{w}, int64_t{i}});
        }
        if (w > 1) split_at(t.stock, {int64_t{w}});
    }
    const int nodes = eng.cluster().num_nodes();
    const auto& ranges = eng.cluster().ranges();
    std::vector<uint64_t> ids;
    for (const auto& r : ranges) ids.push_back(r.id);
    for (size_t i = 0; i < ids.size(); ++i) {
        eng.cluster().transfer_lease(ids[i], static_cast<NodeId>(i % nodes));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Migration presets
// ---------------------------------------------------------------------------

namespace {

NewTableDef customer_part(const std::string& name, const std::vector<std::string>& extra,
                          const std::vector<ColType>& extra_types) {
    NewTableDef nt;
    nt.name = name;
    nt.columns = {{"c_w_id", ColType::Int}, {"c_d_id", ColType::Int}, {"c_id", ColType::Int}};
    for (size_t i = 0; i < extra.size(); ++i) nt.columns.push_back({extra[i], extra_types[i]});
    nt.pk = {"c_w_id", "c_d_id", "c_id"};
    for (const auto& col : nt.columns) nt.column_map.push_back({col.name, {"customer", col.name}});
    return nt;
}

}  // namespace

MigrationSpec split_customer(Strategy s) {
    MigrationSpec spec;
    spec.mclass = MigrationClass::Split;
    spec.strategy = s;
    spec.old_tables = {"customer"};
    spec.new_tables = {
        customer_part("customer_private", {"c_credit", "c_payment", "c_balance"},
                      {ColType::Str, ColType::Dec, ColType::Dec}),
        customer_part("customer_public", {"c_state", "c_city", "c_street"},
                      {ColType::Str, ColType::Str, ColType::Str})};
    return spec;
}

MigrationSpec join_stock_order_line(Strategy s) {
    MigrationSpec spec;
    spec.mclass = MigrationClass::Join;
    spec.strategy = s;
    spec.old_tables = {"order_line", "stock"};
    spec.join_keys = {{"ol_w_id", "s_w_id"}, {"ol_i_id", "s_i_id"}};
    NewTableDef nt;
    nt.name = "stock_order_line";
    nt.columns = {{"ol_w_id", ColType::Int},   {"ol_d_id", ColType::Int},
                  {"ol_o_id", ColType::Int},   {"ol_number", ColType::Int},
                  {"ol_i_id", ColType::Int},   {"ol_qty", ColType::Int},
                  {"ol_amount", ColType::Dec}, {"s_quantity", ColType::Int}};
    nt.pk = {"ol_w_id", "ol_d_id", "ol_o_id", "ol_number"};
    for (const auto& col : nt.columns) {
        if (col.name == "s_quantity") {
            nt.column_map.push_back({col.name, {"stock", "s_quantity"}});
        } else {
            nt.column_map.push_back({col.name, {"order_line", col.name}});
        }
    }
    spec.new_tables = {std::move(nt)};
    return spec;
}

MigrationSpec preaggregate_order_amount(Strategy s) {
    MigrationSpec spec;
    spec.mclass = MigrationClass::Preaggregate;
    spec.strategy = s;
    spec.old_tables = {"order_line"};
    spec.group_keys = {"ol_w_id", "ol_d_id", "ol_o_id"};
    spec.agg_source_column = "ol_amount";
    spec.agg_dest_column = "total_amount";
    NewTableDef nt;
    nt.name = "order_totals";
    nt.columns = {{"ol_w_id", ColType::Int},
                  {"ol_d_id", ColType::Int},
                  {"ol_o_id", ColType::Int},
                  {"total_amount", ColType::Dec}};
    nt.pk = {"ol_w_id", "ol_d_id", "ol_o_id"};
    for (const auto& col : nt.columns) {
        if (col.name == "total_amount") continue;
        nt.column_map.push_back({col.name, {"order_line", col.name}});
    }
    spec.new_tables = {std::move(nt)};
    return spec;
}

MigrationSpec migration_spec(MigrationClass mclass, Strategy s) {
    switch (mclass) {
        case MigrationClass::Split: return split_customer(s);
        case MigrationClass::Join: return join_stock_order_line(s);
        default: return preaggregate_order_amount(s);
    }
}

// ---------------------------------------------------------------------------
// Workload generator
// ---------------------------------------------------------------------------

Workload::Workload(Engine& eng, const Tables& t, MigrationClass mclass, int scale, uint64_t seed)
    : eng_(eng), t_(t), mclass_(mclass), card_(cardinalities(scale)), rng_(seed ^ 0x77c1u) {
    for (int w = 1; w <= card_.warehouses; ++w) {
        for (int d = 1; d <= card_.districts_per_wh; ++d) {
            next_o_id_[{w, d}] = card_.orders_per_district + 1;
        }
    }
}

TxnScript Workload::next(bool live) {
    double u = rng_.unit();
    double acc = 0;
    int pick = 0;
    for (int i = 0; i < 5; ++i) {
        acc += kMix[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    switch (pick) {
        case 0: return new_order(live);
        case 1: return payment(live);
        case 2: return order_status(live);
        case 3: return delivery(live);
        default: return stock_level(live);
    }
}

TxnScript Workload::new_order(bool live) {
    TxnScript tx;
    tx.kind = "new_order";
    int64_t w = rng_.range(1, card_.warehouses);
    int64_t d = rng_.range(1, card_.districts_per_wh);
    int64_t o = next_o_id_[{static_cast<int>(w), static_cast<int>(d)}]++;
    int64_t cnt = rng_.range(card_.min_ol, card_.max_ol);
    int64_t c = rng_.range(1, card_.customers_per_district);

    tx.stmts.push_back(Statement::update(
        "district", Predicate::eq("d_w_id", w).with_eq("d_id", d),
        {{"d_ytd", Dec{o * 100 + d}}}));
    tx.stmts.push_back(Statement::insert("oorder", {w, d, o, c, cnt}));
    const bool join_live = live && mclass_ == MigrationClass::Join;
    for (int64_t ol = 1; ol <= cnt; ++ol) {
        std::vector<Value> line{w, d, o, ol, rng_.range(1, card_.items_per_wh),
                                rng_.range(1, 10), Dec{rng_.range(100, 9999)}};
        // once the join is live, order lines go straight into the joined
        // table; the source-shaped payload carries the order_line columns
        tx.stmts.push_back(
            Statement::insert(join_live ? "stock_order_line" : "order_line", std::move(line)));
    }
    // s_quantity is copied into the joined table and must stay immutable
    // while a join migration runs, so new_order only touches the ytd side
    for (int k = 0; k < 2; ++k) {
        int64_t i = rng_.range(1, card_.items_per_wh);
        tx.stmts.push_back(Statement::update(
            "stock", Predicate::eq("s_w_id", w).with_eq("s_i_id", i),
            {{"s_order_cnt", o}, {"s_ytd", Dec{o * 10 + k}}}));
    }
    tx.new_schema = join_live;
    return tx;
}

TxnScript Workload::payment(bool live) {
    TxnScript tx;
    tx.kind = "payment";
    int64_t w = rng_.range(1, card_.warehouses);
    int64_t d = rng_.range(1, card_.districts_per_wh);
    int64_t c = rng_.range(1, card_.customers_per_district);
    Dec amount{rng_.range(100, 500000)};
    Dec balance{rng_.range(-5000, 500000)};

    if (live && mclass_ == MigrationClass::Split) {
        tx.stmts.push_back(Statement::update(
            "customer_private", Predicate::eq("c_w_id", w).with_eq("c_d_id", d).with_eq("c_id", c),
            {{"c_payment", amount}, {"c_balance", balance}}));
        tx.new_schema = true;
    } else {
        tx.stmts.push_back(Statement::update(
            "customer", Predicate::eq("c_w_id", w).with_eq("c_d_id", d).with_eq("c_id", c),
            {{"c_payment", amount}, {"c_balance", balance}}));
    }
    return tx;
}

TxnScript Workload::order_status(bool live) {
    TxnScript tx;
    tx.kind = "order_status";
    int64_t w = rng_.range(1, card_.warehouses);
    int64_t d = rng_.range(1, card_.districts_per_wh);
    int64_t c = rng_.range(1, card_.customers_per_district);
    int64_t o = rng_.range(1, next_o_id_[{static_cast<int>(w), static_cast<int>(d)}] - 1);

    if (live && mclass_ == MigrationClass::Split) {
        tx.stmts.push_back(Statement::select(
            "customer_private",
            Predicate::eq("c_w_id", w).with_eq("c_d_id", d).with_eq("c_id", c)));
        tx.new_schema = true;
    } else if (live && mclass_ == MigrationClass::Preaggregate) {
        tx.stmts.push_back(Statement::select(
            "order_totals",
            Predicate::eq("ol_w_id", w).with_eq("ol_d_id", d).with_eq("ol_o_id", o)));
        tx.new_schema = true;
    } else {
        tx.stmts.push_back(Statement::select(
            "customer", Predicate::eq("c_w_id", w).with_eq("c_d_id", d).with_eq("c_id", c)));
        tx.stmts.push_back(Statement::select(
            "order_line",
            Predicate::eq("ol_w_id", w).with_eq("ol_d_id", d).with_eq("ol_o_id", o)));
    }
    return tx;
}

TxnScript Workload::delivery(bool live) {
    TxnScript tx;
    tx.kind = "delivery";
    int64_t w = rng_.range(1, card_.warehouses);
    int64_t d = rng_.range(1, card_.districts_per_wh);
    int64_t o = rng_.range(1, card_.orders_per_district);  // always preloaded

    if (live && mclass_ == MigrationClass::Preaggregate) {
        tx.stmts.push_back(Statement::select(
            "order_totals",
            Predicate::eq("ol_w_id", w).with_eq("ol_d_id", d).with_eq("ol_o_id", o)));
        tx.new_schema = true;
    } else {
        tx.stmts.push_back(Statement::select(
            "order_line",
            Predicate::eq("ol_w_id", w).with_eq("ol_d_id", d).with_eq("ol_o_id", o)));
    }
    tx.stmts.push_back(Statement::select(
        "oorder", Predicate::eq("o_w_id", w).with_eq("o_d_id", d).with_eq("o_id", o)));
    return tx;
}

TxnScript Workload::stock_level(bool live) {
    TxnScript tx;
    tx.kind = "stock_level";
    int64_t w = rng_.range(1, card_.warehouses);
    int64_t d = rng_.range(1, card_.districts_per_wh);
    int64_t o = rng_.range(1, card_.orders_per_district);
    // drawn unconditionally so the value stream is identical whether or not
    // the new schema is live (runs stay comparable across strategies)
    int64_t i = rng_.range(1, card_.items_per_wh);

    if (live && mclass_ == MigrationClass::Join) {
        tx.stmts.push_back(Statement::select(
            "stock_order_line",
            Predicate::eq("ol_w_id", w).with_eq("ol_d_id", d).with_eq("ol_o_id", o)));
        tx.new_schema = true;
    } else {
        tx.stmts.push_back(Statement::select(
            "order_line",
            Predicate::eq("ol_w_id", w).with_eq("ol_d_id", d).with_eq("ol_o_id", o)));
        tx.stmts.push_back(Statement::select(
            "stock", Predicate::eq("s_w_id", w).with_eq("s_i_id", i)));
    }
    return tx;
}

}  // namespace tpcc
}  // namespace slsm
