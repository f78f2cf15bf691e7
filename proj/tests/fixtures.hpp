#pragma once

// Lean 3 fixture sources used across the test suites.

namespace fixtures {

// Word problem: integer division, checked via #reduce.
inline constexpr const char* kDivideProof =
    "def divide (x y : ℕ) : ℕ := x / y\n"
    "\n"
    "#reduce divide 240 4  -- The output should be 60, which means each person will get 60 "
    "chocolates.\n";

// Theorem proving: rectangle area as a polynomial identity.
inline constexpr const char* kRectangleProof =
    "import algebra.ring.basic\n"
    "\n"
    "variables (x : ℤ)\n"
    "\n"
    "def rectangle_area : (x + 5) * (2 * x - 3) = 2 * (x * x) + 7 * x - 15 :=\n"
    "begin\n"
    "   have h₁ : (x + 5) * (2 * x - 3) = 2 * (x * x) - 3 * x + 10 * x - 15, by ring,\n"
    "   have h₂ : 2 * (x * x) - 3 * x + 10 * x - 15 = 2 * (x * x) + 7 * x - 15, by simp,\n"
    "   rw h₁,\n"
    "   exact h₂,\n"
    "end\n";

// Placeholder proof that bails out with sorry.
inline constexpr const char* kSorryProof =
    "import data.real.basic\n"
    "\n"
    "variables {α : Type*} [field α]\n"
    "\n"
    "/-- Placeholder for the differential equation -/\n"
    "def diff_eq (p q y : α → α) (x : α) : Prop :=\n"
    "y x = 0 -- This is just a placeholder. A real differential equation would have a more "
    "complex form.\n"
    "\n"
    "lemma second_order_linear_differential_eq (p q y1 y2 y : α → α) "
    "(c1 c2 : α) :\n"
    "(∃ x, diff_eq p q y1 x ∧ diff_eq p q y2 x) → (∀ x, diff_eq p q y x) "
    "→\n"
    "(∀ x, y x = c1 * y1 x + c2 * y2 x) :=\n"
    "begin\n"
    "  intros h_sol h_y x,\n"
    "  -- This is a placeholder. A real proof would show that y x can be written as a linear "
    "combination\n"
    "  -- of y1 x and y2 x using the properties of the differential equation.\n"
    "  sorry\n"
    "end\n";

// Conjunction-shuffling proof; exercises intros/cases/split/rw/exact.
inline constexpr const char* kQuadrilateralProof =
    "import data.real.basic\n"
    "\n"
    "def is_square_quad (AB BC CD DA : ℝ) : Prop := AB = BC ∧ BC = CD ∧ CD = DA\n"
    "\n"
    "def ABCD_is_square : ∀ (AB BC CD DA : ℝ), AB = 5 ∧ BC = 5 ∧ CD = 5 "
    "∧ DA = 5 → is_square_quad AB BC CD DA :=\n"
    "begin\n"
    "   intros AB BC CD DA h,\n"
    "   cases h with h₁ h₂,\n"
    "   cases h₂ with h₃ h₄,\n"
    "   cases h₄ with h₅ h₆,\n"
    "   split,\n"
    "   { rw h₁, exact h₃ },\n"
    "   split,\n"
    "   { rw h₃, exact h₅ },\n"
    "   { rw h₅, exact h₆ },\n"
    "end\n";

// Integer arithmetic with unfold steps and a dec_trivial closer.
inline constexpr const char* kNetMovementProof =
    "import data.int.basic\n"
    "\n"
    "open int\n"
    "\n"
    "def initial_movement : ℤ := 90\n"
    "\n"
    "def backward_movement : ℤ := -45\n"
    "\n"
    "def net_movement (initial backward : ℤ) : ℤ := initial + backward\n"
    "\n"
    "example : net_movement initial_movement backward_movement = 45 :=\n"
    "begin\n"
    "   unfold net_movement,\n"
    "   unfold initial_movement,\n"
    "   unfold backward_movement,\n"
    "   exact dec_trivial,\n"
    "end\n";

// Structurally broken: the second `end` never had a `begin`.
inline constexpr const char* kBrokenProof =
    "import data.real.basic\n"
    "\n"
    "begin\n"
    "end\n"
    "end\n";

}  // namespace fixtures
