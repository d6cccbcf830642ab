#pragma once

#include "slsm/engine.hpp"

namespace slsm {

// TPC-C-lite: six base tables with standard cardinalities per warehouse
// (10 districts, 3000 customers/district) and reduced order/item counts.
// Five transaction profiles exercise point and range reads and writes
// against every table a migration can touch.
namespace tpcc {

struct Cardinalities {
    int warehouses = 1;
    int districts_per_wh = 10;
    int customers_per_district = 3000;
    int items_per_wh = 1000;          // stock rows per warehouse
    int orders_per_district = 300;
    int min_ol = 5, max_ol = 15;
};

struct Tables {
    TableId warehouse = 0, district = 0, customer = 0;
    TableId oorder = 0, order_line = 0, stock = 0;
};

// Creates the schema, loads a deterministic population, and splits the
// tables into ranges with round-robin leaseholders.
Tables load(Engine& eng, int scale, uint64_t seed);

Cardinalities cardinalities(int scale);

// The three benchmark migrations.
MigrationSpec split_customer(Strategy s);
MigrationSpec join_stock_order_line(Strategy s);
MigrationSpec preaggregate_order_amount(Strategy s);
MigrationSpec migration_spec(MigrationClass mclass, Strategy s);

// One generated transaction: a profile name plus its statement script.
struct TxnScript {
    std::string kind;
    std::vector<Statement> stmts;
    bool new_schema = false;  // touches the migration's new schema
};

// Deterministic workload generator. Before the migration activates it
// emits the original mix; once a lazy migration is registered (or an OSC
// migration turns public), statements on the migrated tables address the
// new schema instead.
class Workload {
public:
    Workload(Engine& eng, const Tables& t, MigrationClass mclass, int scale, uint64_t seed);

    // `new_schema_live` switches the affected statements over.
    TxnScript next(bool new_schema_live);

    static constexpr double kMix[5] = {0.45, 0.43, 0.04, 0.04, 0.04};
    static constexpr const char* kKinds[5] = {"new_order", "payment", "order_status", "delivery",
                                              "stock_level"};

private:
    Engine& eng_;
    Tables t_;
    MigrationClass mclass_;
    Cardinalities card_;
    Rng rng_;
    std::map<std::pair<int, int>, int> next_o_id_;  // per (w, d)

    TxnScript new_order(bool live);
    TxnScript payment(bool live);
    TxnScript order_status(bool live);
    TxnScript delivery(bool live);
    TxnScript stock_level(bool live);
};

}  // namespace tpcc
}  // namespace slsm
