#ifndef BRIDGEMC_ERRORS_HPP_
#define BRIDGEMC_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bridgemc {

// A parameter or configuration value lies outside its admissible domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Every particle weight at some time step is zero.
class DegenerateWeightsError : public std::runtime_error {
 public:
  explicit DegenerateWeightsError(std::size_t time_index)
      : std::runtime_error("all particle weights are zero at time index " +
                           std::to_string(time_index)),
        time_index_(time_index) {}
  std::size_t time_index() const { return time_index_; }

 private:
  std::size_t time_index_;
};

// The requested operation needs a model capability that is not available,
// e.g. backward sampling without a pointwise transition density.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bridgemc

#endif  // BRIDGEMC_ERRORS_HPP_
