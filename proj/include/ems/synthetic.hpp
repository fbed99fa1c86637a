#pragma once

// Seeded stand-ins for the graduate-admissions and credit-risk CSV files.
// Column names, value ranges, categorical levels and rough marginals follow
// the public datasets; the joint distribution is a hand-built latent model.

#include <cstddef>
#include <cstdint>
#include <string>

namespace ems::synthetic {

inline constexpr std::size_t kAdmissionsRows = 770;
inline constexpr std::size_t kAdmissionsBaseRows = 500;
inline constexpr std::size_t kLoanRows = 32582;

// `base_rows` independent applicants, then rows with Chance of Admit < 0.5
// duplicated until `rows` is reached (the source file was augmented the same way).
std::string admissions_csv(std::uint64_t seed, std::size_t rows = kAdmissionsRows,
                           std::size_t base_rows = kAdmissionsBaseRows);

std::string loans_csv(std::uint64_t seed, std::size_t rows = kLoanRows);

}  // namespace ems::synthetic
