#pragma once

#include <stdexcept>
#include <string>

namespace dipmark {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NegativeProbability : Error {
    using Error::Error;
};
struct NotNormalized : Error {
    using Error::Error;
};
struct BadKey : Error {
    using Error::Error;
};
struct NoContext : Error {
    using Error::Error;
};
struct DegenerateAlpha : Error {
    using Error::Error;
};
struct EmptyCorpus : Error {
    using Error::Error;
};
struct AllZeroTopK : Error {
    using Error::Error;
};
struct ProviderError : Error {
    using Error::Error;
};
struct SequenceTooShort : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct OutOfVocab : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace dipmark
