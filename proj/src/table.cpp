#include "ssqr/table.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace ssqr::io {

Column Column::real(std::string name, std::string unit, int digits) {
    if (digits < 1 || digits > 17) throw std::invalid_argument("digits must lie in [1, 17]");
    return {std::move(name), std::move(unit), ColumnKind::real, digits};
}

Column Column::integer(std::string name, std::string unit) {
    return {std::move(name), std::move(unit), ColumnKind::integer, 0};
}

Column Column::text(std::string name) { return {std::move(name), "", ColumnKind::text, 0}; }

ResultTable::ResultTable(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
    for (const auto& c : columns_) {
        if (c.name.empty()) throw std::invalid_argument("column names must be nonempty");
        if (c.name.find_first_of(",\"\n[]") != std::string::npos || c.unit.find_first_of(",\"\n[]") != std::string::npos)
            throw std::invalid_argument("column '" + c.name + "' contains a reserved character");
    }
}

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, table '" + name_ + "' has " +
                                    std::to_string(columns_.size()) + " columns");
    for (std::size_t i = 0; i < row.size(); ++i) {
        auto& cell = row[i];
        switch (columns_[i].kind) {
            case ColumnKind::real:
                if (auto* n = std::get_if<long long>(&cell)) cell = static_cast<double>(*n);
                if (!std::holds_alternative<double>(cell))
                    throw std::invalid_argument("column '" + columns_[i].name + "' expects a number");
                break;
            case ColumnKind::integer:
                if (!std::holds_alternative<long long>(cell))
                    throw std::invalid_argument("column '" + columns_[i].name + "' expects an integer");
                break;
            case ColumnKind::text: {
                const auto* s = std::get_if<std::string>(&cell);
                if (!s) throw std::invalid_argument("column '" + columns_[i].name + "' expects text");
                if (s->find_first_of("\r\n") != std::string::npos)
                    throw std::invalid_argument("text cells may not contain line breaks");
                break;
            }
        }
    }
    rows_.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
    if (key.empty() || key.find_first_of(":\n") != std::string::npos || value.find('\n') != std::string::npos)
        throw std::invalid_argument("metadata must be single-line with a key free of ':'");
    for (auto& [k, v] : metadata_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    metadata_.emplace_back(key, value);
}

std::string ResultTable::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata_)
        if (k == key) return v;
    return {};
}

std::size_t ResultTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    throw std::out_of_range("no column '" + name + "' in table '" + name_ + "'");
}

double ResultTable::real_at(std::size_t row, const std::string& column) const {
    const auto& cell = rows_.at(row).at(column_index(column));
    if (const auto* d = std::get_if<double>(&cell)) return *d;
    if (const auto* n = std::get_if<long long>(&cell)) return static_cast<double>(*n);
    throw std::invalid_argument("column '" + column + "' is not numeric");
}

std::string format_real(double value, int digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos && (s.empty() || (s.front() != ' ' && s.back() != ' ')))
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error("unterminated quote in: " + line);
    cells.push_back(std::move(cur));
    return cells;
}

std::string kind_code(const Column& c) {
    switch (c.kind) {
        case ColumnKind::real:
            return "r" + std::to_string(c.digits);
        case ColumnKind::integer:
            return "i";
        case ColumnKind::text:
            return "t";
    }
    return "t";
}

Column column_from(const std::string& header, const std::string& code) {
    std::string name = header;
    std::string unit;
    if (!header.empty() && header.back() == ']') {
        const auto open = header.rfind(" [");
        if (open != std::string::npos) {
            name = header.substr(0, open);
            unit = header.substr(open + 2, header.size() - open - 3);
        }
    }
    if (code == "i") return Column::integer(name, unit);
    if (code == "t") return Column::text(name);
    if (code.size() > 1 && code[0] == 'r') return Column::real(name, unit, std::stoi(code.substr(1)));
    throw std::runtime_error("unknown column type '" + code + "'");
}

double parse_real(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw std::runtime_error("not a number: '" + s + "'");
    return v;
}

}  // namespace

void write_csv(const ResultTable& table, std::ostream& out) {
    out << "# table: " << table.name() << '\n';
    out << "# column_types: ";
    for (std::size_t i = 0; i < table.columns().size(); ++i) out << (i ? "," : "") << kind_code(table.columns()[i]);
    out << '\n';
    for (const auto& [k, v] : table.metadata()) out << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        const auto& c = table.columns()[i];
        out << (i ? "," : "") << c.name;
        if (!c.unit.empty()) out << " [" << c.unit << ']';
    }
    out << '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            const auto& cell = row[i];
            if (const auto* d = std::get_if<double>(&cell))
                out << format_real(*d, table.columns()[i].digits);
            else if (const auto* n = std::get_if<long long>(&cell))
                out << *n;
            else
                out << quote(std::get<std::string>(cell));
        }
        out << '\n';
    }
}

ResultTable read_csv(std::istream& in) {
    std::string line;
    std::string name;
    std::vector<std::string> codes;
    std::vector<std::pair<std::string, std::string>> meta;
    std::optional<ResultTable> table;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!table && line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon == std::string::npos) throw std::runtime_error("malformed metadata line: " + line);
            const std::string key = line.substr(2, colon - 2);
            const std::string value = line.substr(colon + 2);
            if (key == "table")
                name = value;
            else if (key == "column_types")
                codes = split_csv_line(value);
            else
                meta.emplace_back(key, value);
            continue;
        }
        if (!table) {
            const auto headers = split_csv_line(line);
            if (codes.size() != headers.size()) throw std::runtime_error("column_types does not match the header");
            std::vector<Column> cols;
            for (std::size_t i = 0; i < headers.size(); ++i) cols.push_back(column_from(headers[i], codes[i]));
            table.emplace(name, std::move(cols));
            for (const auto& [k, v] : meta) table->set_meta(k, v);
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != table->columns().size()) throw std::runtime_error("ragged row: " + line);
        std::vector<Cell> row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            switch (table->columns()[i].kind) {
                case ColumnKind::real:
                    row.emplace_back(parse_real(cells[i]));
                    break;
                case ColumnKind::integer:
                    row.emplace_back(std::stoll(cells[i]));
                    break;
                case ColumnKind::text:
                    row.emplace_back(cells[i]);
                    break;
            }
        }
        table->add_row(std::move(row));
    }
    if (!table) throw std::runtime_error("table has no header row");
    return *table;
}

void write_table(const ResultTable& table, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(table, out);
    if (!out) throw std::runtime_error("error writing " + path.string());
}

ResultTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_csv(in);
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary);
    if (!out_) throw std::runtime_error("cannot write " + path.string());
}

void EventLogWriter::write(int trial_id, const mc::SwapEvent& e) {
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["wait_A_s"] = e.wait_a;
    j["wait_B_s"] = e.wait_b;
    j["fidelity"] = e.fidelity;
    j["bsm_success"] = e.bsm_success;
    j["trial_id"] = trial_id;
    out_ << j.dump() << '\n';
    ++written_;
}

void EventLogWriter::write(const mc::TrialRecord& record) {
    for (const auto& e : record.events) write(record.trial_id, e);
}

std::vector<LoggedEvent> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<LoggedEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        LoggedEvent le;
        le.trial_id = j.at("trial_id").get<int>();
        le.event.t = j.at("t").get<double>();
        le.event.wait_a = j.at("wait_A_s").get<double>();
        le.event.wait_b = j.at("wait_B_s").get<double>();
        le.event.fidelity = j.at("fidelity").get<double>();
        le.event.bsm_success = j.at("bsm_success").get<bool>();
        out.push_back(le);
    }
    return out;
}

}  // namespace ssqr::io
