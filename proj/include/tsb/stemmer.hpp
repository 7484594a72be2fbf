#pragma once

#include <string>

namespace tsb {

// Porter (1980) stemmer over lowercase ASCII words. Used by the stemmed
// matching stage of METEOR.
std::string porter_stem(const std::string& word);

}  // namespace tsb
