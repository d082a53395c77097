"""Reversible arithmetic circuits over {X, CX, CCX} with ancilla-aware builders."""
