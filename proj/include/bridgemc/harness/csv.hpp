#ifndef BRIDGEMC_HARNESS_CSV_HPP_
#define BRIDGEMC_HARNESS_CSV_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace bridgemc::harness {

// Shortest round-trip-safe text at 17 significant digits; "inf", "-inf" and
// "nan" for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& s);

// RFC 4180: fields containing a comma, quote, CR or LF are quoted, with
// embedded quotes doubled. Records end in CRLF.
std::string quote_field(const std::string& field);
void write_record(std::ostream& out, const std::vector<std::string>& fields);

// Reads one record, honoring quoted fields that span lines. Returns false at
// end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields);

}  // namespace bridgemc::harness

#endif  // BRIDGEMC_HARNESS_CSV_HPP_
