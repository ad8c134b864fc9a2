#ifndef HYPEREMBED_SERIALIZE_HPP
#define HYPEREMBED_SERIALIZE_HPP

#include <string>

#include "hyperembed/complex.hpp"

namespace hyperembed {

/// Line-oriented text format: header (base size, max size, copy table,
/// ground sizes), then per defined part a sorted tuple list. Canonical:
/// serialize(parse(s)) == s for any serialize output, and parse(serialize(x))
/// == x.
std::string to_text(const Complex& H);
std::string to_text(const MarkedComplex& GM);

Complex complex_from_text(const std::string& text);
MarkedComplex marked_from_text(const std::string& text);

/// JSON mirrors of the same content.
std::string to_json(const Complex& H);
std::string to_json(const MarkedComplex& GM);
Complex complex_from_json(const std::string& text);
MarkedComplex marked_from_json(const std::string& text);

} // namespace hyperembed

#endif
