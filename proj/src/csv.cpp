#include "popsynth/csv.hpp"

#include "popsynth/errors.hpp"

#include <istream>
#include <ostream>

namespace popsynth::csv {

std::vector<std::vector<std::string>> read_all(std::istream &in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    bool row_started = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        records.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || field_started) throw DataError("csv: stray quote inside unquoted field");
            quoted = true;
            field_started = true;
            row_started = true;
            break;
        case ',':
            end_field();
            row_started = true;
            break;
        case '\r':
            if (in.peek() == '\n') in.get(c);
            end_row();
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(c);
            field_started = true;
            row_started = true;
            break;
        }
    }
    if (quoted) throw DataError("csv: unterminated quoted field");
    if (row_started || field_started || !field.empty() || !row.empty()) end_row();
    return records;
}

std::string escape(const std::string &field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

void write_row(std::ostream &out, const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

} // namespace popsynth::csv
