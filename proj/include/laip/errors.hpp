#pragma once

#include <stdexcept>

namespace laip {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Environment construction / lookup.
class ValidationError : public Error { public: using Error::Error; };
class UnknownRoom : public Error { public: using Error::Error; };
class UnknownRestaurant : public Error { public: using Error::Error; };
class UnknownTrajectory : public Error { public: using Error::Error; };
class Unreachable : public Error { public: using Error::Error; };
class IllegalTrajectory : public Error { public: using Error::Error; };

// Inference.
class NoViableGoal : public Error { public: using Error::Error; };
class DegeneratePosterior : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class DegenerateInput : public Error { public: using Error::Error; };

// Provider boundary.
class ParseFailure : public Error { public: using Error::Error; };
class TransportError : public Error { public: using Error::Error; };
class BackendRefusal : public Error { public: using Error::Error; };
class CacheMiss : public Error { public: using Error::Error; };

// Orchestration.
class AlignmentError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class TemplateError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

}  // namespace laip
