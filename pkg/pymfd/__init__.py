# -*- coding: utf-8 -*-
# Copyright (c) 2026-present pymfd contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
"""Particle-to-field deposition of multifield cosmological maps and grids."""
from pymfd import arch
from pymfd import config
from pymfd import deposit
from pymfd import errors
from pymfd import fields
from pymfd import grids
from pymfd import kernels
from pymfd import moments
from pymfd import params
from pymfd import snapshot
from pymfd import spatial

__all__ = [
    "arch",
    "config",
    "deposit",
    "errors",
    "fields",
    "grids",
    "kernels",
    "moments",
    "params",
    "snapshot",
    "spatial",
]

__version__ = "0.1.0"
