#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ymhk {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument: axis out of range, rank mismatch, bad enum value, ...
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Principal logarithm requested too close to the cut locus.
class BranchError : public Error {
 public:
  using Error::Error;
};

/// A plaquette product left the principal log chart; carries the site.
class CurvatureTooRough : public Error {
 public:
  CurvatureTooRough(std::int64_t site, const std::string& what)
      : Error(what), site_(site) {}
  std::int64_t site() const noexcept { return site_; }

 private:
  std::int64_t site_;
};

/// A stencil would wrap onto its own footprint on this lattice.
class LatticeTooSmall : public Error {
 public:
  using Error::Error;
};

/// Snapshot bytes do not parse; carries the offset of the first bad byte.
class FormatError : public Error {
 public:
  FormatError(std::uint64_t offset, const std::string& what)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Snapshot parsed but the stored fields violate invariants.
class CorruptSnapshot : public Error {
 public:
  using Error::Error;
};

/// Run configuration problem; names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace ymhk
