"""Polynomial functors, polynomial trees, their morphisms and state machines."""
from .poly import Poly, PolyMap, PolyError, BudgetExceeded, Coalgebra
from .tree import Tree, FiniteTree, LazyTree, constant_tree, sum_tree, tensor_tree, bisimilar, truncate
from .hom import TruncMorphism, validate_trunc, enumerate_trunc_homs, compose_trunc, id_trunc
from .machine import Machine, unfold_machine, validate_machine, compose_machines

__all__ = [
    "Poly", "PolyMap", "PolyError", "BudgetExceeded", "Coalgebra",
    "Tree", "FiniteTree", "LazyTree", "constant_tree", "sum_tree", "tensor_tree", "bisimilar", "truncate",
    "TruncMorphism", "validate_trunc", "enumerate_trunc_homs", "compose_trunc", "id_trunc",
    "Machine", "unfold_machine", "validate_machine", "compose_machines",
]
__version__ = "0.1.0"
