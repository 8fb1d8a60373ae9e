"""The five sorting-algorithm fragments used throughout the examples and tests.

Sources are kept byte-for-byte, including indentation and blank lines, so
token counts stay stable.
"""
from __future__ import annotations

from pathlib import Path

from ..embedder import CodeFragment

BUBBLE_SORT = """\
def bubble_sort(arr):
    n = len(arr)
    for i in range(n):
        for j in range(0, n-i-1):
            if arr[j] > arr[j+1]:
                arr[j], arr[j+1] = arr[j+1], arr[j]
"""

SELECTION_SORT = """\
def selection_sort(arr):
    for i in range(len(arr)):
        min_idx = i
        for j in range(i+1, len(arr)):
            if arr[j] < arr[min_idx]:
                min_idx = j
        arr[i], arr[min_idx] = arr[min_idx], arr[i]
    return arr
"""

INSERTION_SORT = """\
def insertion_sort(arr):
    for i in range(1, len(arr)):
        key = arr[i]
        j = i-1
        while j >=0 and key < arr[j]:
            arr[j + 1] = arr[j]
            j -= 1
        arr[j + 1] = key
    return arr
"""

MERGE_SORT = """\
def merge_sort(arr):
    if len(arr) > 1:
        mid = len(arr) // 2
        L = arr[:mid]
        R = arr[mid:]

        merge_sort(L)
        merge_sort(R)

        i = j = k = 0
        while i < len(L) and j < len(R):
            if L[i] < R[j]:
                arr[k] = L[i]
                i += 1
            else:
                arr[k] = R[j]
                j += 1
            k += 1

        while i < len(L):
            arr[k] = L[i]
            i += 1
            k += 1

        while j < len(R):
            arr[k] = R[j]
            j += 1
            k += 1
"""

QUICK_SORT = """\
def partition(arr, low, high):
    pivot = arr[high]
    i = low - 1

    for j in range(low, high):
        if arr[j] <= pivot:
            i = i + 1
            arr[i], arr[j] = arr[j], arr[i]

    arr[i + 1], arr[high] = arr[high], arr[i + 1]
    return i + 1

def quick_sort(arr, low, high):
    if low < high:
        pi = partition(arr, low, high)

        quick_sort(arr, low, pi - 1)
        quick_sort(arr, pi + 1, high)
"""

# short name -> (fragment id, source); order matches the figure grid
FIXTURES = {
    "bubble": ("bubble_sort", BUBBLE_SORT),
    "selection": ("selection_sort", SELECTION_SORT),
    "insertion": ("insertion_sort", INSERTION_SORT),
    "merge": ("merge_sort", MERGE_SORT),
    "quick": ("quick_sort", QUICK_SORT),
}
FIXTURE_PREFIX = "fixtures:"


def fixture(name: str) -> CodeFragment:
    for short, (frag_id, source) in FIXTURES.items():
        if name in (short, frag_id):
            return CodeFragment(frag_id, source)
    raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")


def fixture_corpus() -> list[CodeFragment]:
    return [CodeFragment(frag_id, source) for frag_id, source in FIXTURES.values()]


def resolve_fragment(spec: str) -> CodeFragment:
    """``fixtures:<name>`` or a path to a source file (id = file stem)."""
    if spec.startswith(FIXTURE_PREFIX):
        return fixture(spec[len(FIXTURE_PREFIX):])
    path = Path(spec)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {spec}")
    return CodeFragment(path.stem, path.read_text(encoding="utf-8"))
