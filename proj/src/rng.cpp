#include "entail/rng.hpp"

#include <sstream>

namespace entail {

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& s) {
  std::istringstream is(s);
  is >> engine_;
  if (!is) throw ArgumentError("Rng::restore: malformed state string");
}

}  // namespace entail
