#ifndef TERMFORGE_ERROR_H_
#define TERMFORGE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace termforge {

// Root of every domain error raised by the library. The CLI maps these to
// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TERMFORGE_DEFINE_ERROR(Name)        \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

TERMFORGE_DEFINE_ERROR(ValidationError);
TERMFORGE_DEFINE_ERROR(EmptyFieldError);
TERMFORGE_DEFINE_ERROR(DuplicateKeyError);
TERMFORGE_DEFINE_ERROR(ConflictError);
TERMFORGE_DEFINE_ERROR(NoEntriesError);
TERMFORGE_DEFINE_ERROR(DimensionMismatchError);
TERMFORGE_DEFINE_ERROR(RangeError);
TERMFORGE_DEFINE_ERROR(UnsatisfiableError);
TERMFORGE_DEFINE_ERROR(NoCompletionError);
TERMFORGE_DEFINE_ERROR(LengthMismatchError);
TERMFORGE_DEFINE_ERROR(EmptyCorpusError);
TERMFORGE_DEFINE_ERROR(EmptyReferenceError);
TERMFORGE_DEFINE_ERROR(DegenerateError);
TERMFORGE_DEFINE_ERROR(ZeroVarianceError);
TERMFORGE_DEFINE_ERROR(EmptyDictionaryError);
TERMFORGE_DEFINE_ERROR(TemplateError);
TERMFORGE_DEFINE_ERROR(InvalidLabelError);
TERMFORGE_DEFINE_ERROR(AuthError);
TERMFORGE_DEFINE_ERROR(TimeoutError);
TERMFORGE_DEFINE_ERROR(RateLimitError);
TERMFORGE_DEFINE_ERROR(MalformedResponseError);
TERMFORGE_DEFINE_ERROR(HttpError);
TERMFORGE_DEFINE_ERROR(IoError);

#undef TERMFORGE_DEFINE_ERROR

// Input that failed to parse; carries the 1-based line number (0 when the
// error is not tied to a line).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + reason
                       : reason),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace termforge

#endif  // TERMFORGE_ERROR_H_
