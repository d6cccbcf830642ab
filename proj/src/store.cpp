#include "slsm/store.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace slsm {

namespace {

std::string escape_field(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\\' || c == ',' || c == '\n' || c == '\t') out.push_back('\\');
        out.push_back(c == '\n' ? 'n' : c);
    }
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '\\' && i + 1 < line.size()) {
            char n = line[++i];
            cur.push_back(n == 'n' ? '\n' : n);
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

void Store::dump(std::ostream& out, const KeyInterval& iv) const {
    for (auto it = rows_.lower_bound(iv.start); it != rows_.end(); ++it) {
        if (!iv.end.b.empty() && !(it->first < iv.end)) break;
        out << it->first.hex() << '\t';
        for (size_t i = 0; i < it->second.columns.size(); ++i) {
            if (i) out << ',';
            out << escape_field(value_to_string(it->second.columns[i]));
        }
        out << '\n';
    }
}

void Store::dump_all(std::ostream& out) const { dump(out, KeyInterval{Key{}, Key{}}); }

void Store::load(std::istream& in, const Catalog& cat) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw IoError("bad snapshot line: " + line);
        Key k = Key::from_hex(line.substr(0, tab));
        const TableDescriptor* owner = nullptr;
        for (const auto& [id, t] : cat.tables()) {
            if (cat.belongs_to(t, k)) {
                owner = &t;
                break;
            }
        }
        if (!owner) throw IoError("snapshot key matches no table: " + line.substr(0, tab));
        auto fields = split_fields(line.substr(tab + 1));
        if (fields.size() != owner->columns.size()) {
            throw IoError("snapshot column count mismatch for " + owner->name);
        }
        RowValue row;
        row.columns.reserve(fields.size());
        for (size_t i = 0; i < fields.size(); ++i) {
            row.columns.push_back(value_from_string(owner->columns[i].type, fields[i]));
        }
        rows_[k] = std::move(row);
    }
}

}  // namespace slsm
