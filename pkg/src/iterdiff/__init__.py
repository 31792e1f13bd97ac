"""Iterated difference sets, nearest-integer recurrence and their finite certificates."""

import sys

# exact values such as n_k^3 F(w) run to thousands of digits; decimal I/O must not be capped
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

from .core_diff import (DiffStructure, FiniteSequence, FSStructure, IndexTuple,
                        contains_diff_structure, contains_fs_structure, diff_set, diff_signs,
                        fs_set, iterated_diff, partial_sums, read_sequence_file)
from .dioph import (Condition, Mod1Bound, PolySpec, cf_convergents, decompose_polynomial,
                    dist_mod1, partial_quotients, poly_eval_mod1, simultaneous_search)
from .errors import (BoundExceeded, IterDiffError, MalformedInput, MalformedQuery,
                     MalformedTuple, NotEnoughElements, NotFound, PipelineIncomplete,
                     PrecisionExhausted, TooShort)
from .hierarchy import (lacunary_fs_check, multiples_subsequence, powers_of_ten_set,
                        strict_inclusion_set, window_density)
from .measure_sim import cantor_point, char_integral, limit_table
from .ramsey import (Coloring, cube_cell, finitistic_cubic_pipeline, monochromatic_search,
                     ramsey_upper_bound)
from .reals import ExactRational, Interval, NamedIrrational, constant, parse_real
from .verify import verify_certificate, verify_witness
from .witness import (build_even_avoider, build_high_degree_avoider, build_nonsyndetic_avoider,
                      build_square_avoider, find_delta_witness, sarkozy_search)

__version__ = "0.1.0"
