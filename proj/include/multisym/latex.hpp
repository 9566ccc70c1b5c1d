#pragma once

// LaTeX rendering of symbols, expressions and forms in multi-index notation:
// p^{\nu}_{A} for momenta, d^{m}x and d^{m-1}x_{\nu} for the base volume forms.

#include <string>

#include "multisym/forms.hpp"

namespace multisym {

[[nodiscard]] std::string latex(const Symbol& s);
[[nodiscard]] std::string latex(const Expr& e);
[[nodiscard]] std::string latex(const DiffForm& f);

}  // namespace multisym
