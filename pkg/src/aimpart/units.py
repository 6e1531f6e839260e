"""Unit conventions. All internal quantities are in Hartree atomic units."""

# CODATA 2018. Fixed project-wide; inputs declaring angstrom are converted once
# at parse time and never touched again.
BOHR_PER_ANGSTROM = 1.8897261254578281
ANGSTROM_PER_BOHR = 0.529177210903
