#pragma once

#include <string>

namespace proce {

// Shortest decimal string that round-trips to the same double ("1.5", "0.1",
// "1e+30"). Locale-independent; used for CSV cells and anywhere bytes must be
// reproducible.
std::string format_double(double v);

// Locale-independent strtod over the full cell; `context` names the location
// in the error message.
double parse_double(const std::string& text, const std::string& context);

std::string trim(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace proce
