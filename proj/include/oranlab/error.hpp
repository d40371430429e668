#pragma once

#include <stdexcept>
#include <string>

namespace oranlab {

// Every failure the library reports carries a short machine-readable code
// (e.g. "ParseError") alongside the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define ORANLAB_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

ORANLAB_DEFINE_ERROR(EncodeError);
ORANLAB_DEFINE_ERROR(ParseError);
ORANLAB_DEFINE_ERROR(UnknownStyle);
ORANLAB_DEFINE_ERROR(DeliveryFailed);
ORANLAB_DEFINE_ERROR(ConfigError);
ORANLAB_DEFINE_ERROR(InsufficientData);
ORANLAB_DEFINE_ERROR(EmptyTraining);
ORANLAB_DEFINE_ERROR(EmptySamples);
ORANLAB_DEFINE_ERROR(LabelError);

#undef ORANLAB_DEFINE_ERROR

}  // namespace oranlab
