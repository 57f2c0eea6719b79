#pragma once

#include <exception>

namespace srnis::detail {

// Exceptions must not escape an OpenMP region; the first one thrown is
// kept here and rethrown after the region ends.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
#pragma omp critical(srnis_exception_slot)
      if (!error_) error_ = std::current_exception();
    }
  }

  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace srnis::detail
