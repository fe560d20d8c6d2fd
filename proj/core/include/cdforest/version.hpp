#ifndef CDFOREST_VERSION_HPP
#define CDFOREST_VERSION_HPP

namespace cdforest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cdforest

#endif  // CDFOREST_VERSION_HPP
