"""Embedded document store: one JSON file per entity, atomic writes.

Documents live under ``<root>/<collection>/<id>.json`` and are mirrored
by an in-memory index rebuilt at startup.  A single lock serializes
writers; readers hit the index and receive defensive copies, so handing
a document to a caller never aliases store state.
"""

from __future__ import annotations

import copy
import json
import os
import threading
from pathlib import Path
from typing import Iterator

__all__ = ["DocumentStore"]


class DocumentStore:
    def __init__(self, root: str | Path):
        self._root = Path(root)
        self._lock = threading.RLock()
        self._index: dict[str, dict[str, dict]] = {}
        self._root.mkdir(parents=True, exist_ok=True)
        self._rebuild_index()

    def _rebuild_index(self) -> None:
        for coll_dir in sorted(self._root.iterdir()):
            if not coll_dir.is_dir():
                continue
            docs: dict[str, dict] = {}
            for doc_path in sorted(coll_dir.glob("*.json")):
                docs[doc_path.stem] = json.loads(doc_path.read_text())
            self._index[coll_dir.name] = docs

    def _path(self, collection: str, doc_id: str) -> Path:
        if not doc_id or "/" in doc_id or doc_id.startswith("."):
            raise ValueError(f"invalid document id {doc_id!r}")
        return self._root / collection / f"{doc_id}.json"

    def put(self, collection: str, doc_id: str, doc: dict) -> None:
        path = self._path(collection, doc_id)
        body = json.dumps(doc, sort_keys=True, indent=1)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(f".{doc_id}.tmp")
            tmp.write_text(body)
            os.replace(tmp, path)
            self._index.setdefault(collection, {})[doc_id] = json.loads(body)

    def get(self, collection: str, doc_id: str) -> dict | None:
        with self._lock:
            doc = self._index.get(collection, {}).get(doc_id)
            return copy.deepcopy(doc)

    def delete(self, collection: str, doc_id: str) -> bool:
        path = self._path(collection, doc_id)
        with self._lock:
            existed = self._index.get(collection, {}).pop(doc_id, None) is not None
            if existed:
                path.unlink(missing_ok=True)
            return existed

    def all(self, collection: str) -> list[dict]:
        with self._lock:
            return [copy.deepcopy(d) for d in self._index.get(collection, {}).values()]

    def ids(self, collection: str) -> Iterator[str]:
        with self._lock:
            return iter(sorted(self._index.get(collection, {})))

    def exists(self, collection: str, doc_id: str) -> bool:
        with self._lock:
            return doc_id in self._index.get(collection, {})
