# Utils package
from .matrix_io import read_matrix_csv, write_matrix_csv, read_json, write_json
from .parallel import chunked_map

__all__ = ["read_matrix_csv", "write_matrix_csv", "read_json", "write_json", "chunked_map"]
