#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace popsynth::csv {

// RFC 4180 comma-separated values: double quotes for fields containing
// commas, quotes or line breaks; "" escapes a quote inside a quoted field.
// Both LF and CRLF records are accepted on input; output uses LF.

std::vector<std::vector<std::string>> read_all(std::istream &in);

void write_row(std::ostream &out, const std::vector<std::string> &fields);

std::string escape(const std::string &field);

} // namespace popsynth::csv
