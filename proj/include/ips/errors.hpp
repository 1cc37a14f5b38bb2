#pragma once
#include <stdexcept>
#include <string>

namespace ips {

// Domain errors map to CLI exit code 1. Each carries a stable name so the
// CLI and tests can match on it without parsing the message text.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define IPS_ERROR_TYPE(T)                                        \
    class T : public Error {                                     \
    public:                                                      \
        explicit T(const std::string& what) : Error(#T, what) {} \
    }

IPS_ERROR_TYPE(NormalizationError);
IPS_ERROR_TYPE(DegenerateLabels);
IPS_ERROR_TYPE(SupportMismatch);
IPS_ERROR_TYPE(SimplexError);  // pi or rho is not a positive probability vector
IPS_ERROR_TYPE(AbsoluteContinuityError);
IPS_ERROR_TYPE(InfeasibleRegime);
IPS_ERROR_TYPE(WorkloadLpInfeasible);
IPS_ERROR_TYPE(NumericalInstability);
IPS_ERROR_TYPE(ProtocolViolation);
IPS_ERROR_TYPE(InsufficientHorizon);
IPS_ERROR_TYPE(RangeError);
IPS_ERROR_TYPE(ThresholdNotMet);
IPS_ERROR_TYPE(ConfigError);

#undef IPS_ERROR_TYPE

}  // namespace ips
