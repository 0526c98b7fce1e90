# coding=utf-8
"""
This module contains a base class shared by all adafe configuration and
report objects.
"""
import json
import os
import warnings
from importlib import metadata
from pydoc import locate
from typing import Any, Dict, Optional, Union, IO

import numpy as np
import pandas

THREADS_ENV = "ADAFE_THREADS"


class NpEncoder(json.JSONEncoder):
    def default(self, o):  # pylint: disable=E0202
        if isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, np.floating):
            return float(o)
        elif isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.bool_):
            return bool(o)
        return json.JSONEncoder.default(self, o)


def package_version() -> Optional[str]:
    """ Return the installed version of adafe, or None for a source checkout. """
    try:
        return metadata.version("adafe")
    except metadata.PackageNotFoundError:
        return None


def dependency_versions() -> Dict[str, str]:
    return {"numpy": np.__version__, "pandas": pandas.__version__}


def worker_count(requested: Optional[int] = None) -> int:
    """ Number of worker threads for batch jobs: the requested count, capped
    by the ADAFE_THREADS environment variable when it is set. """
    count = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            count = min(count, int(cap))
        except ValueError:
            warnings.warn(f"Ignoring non-integer {THREADS_ENV}={cap!r}.", UserWarning)
    return max(1, count)


class BaseFrontendObj:
    """
    Base class for adafe objects that can be written to and read from JSON.
    Includes functions for representation and serialization.

    Subclasses define ``_to_dict`` and ``_from_dict``. The serialized form
    records the class, the attributes, and the versions of adafe, numpy and
    pandas in effect when the object was written.
    """

    def __repr__(self):
        """
        General string representation of an adafe object. Unless they
        are non-iterable builtins, attributes' default (object) repr
        functions are used.

        Returns:
            str: A representation of the object in the following form:
                [module name].[class name](attr1=[value1],
                                           attr2=[value2],
                                           ...)
        """
        attr_repr_lst = []
        for key, value in self.__dict__.items():
            if value.__class__.__module__ == "builtins":
                try:
                    _ = iter(value)
                except TypeError:
                    attr_repr_lst.append(f"{key}={value}")
                else:
                    if isinstance(value, str):
                        attr_repr_lst.append(f"{key}={value!r}")
                    else:
                        attr_repr_lst.append(f"{key}={object.__repr__(value)}")
            else:
                attr_repr_lst.append(f"{key}={object.__repr__(value)}")
        attr_repr = ", ".join(attr_repr_lst)
        return f"{self.__module__}.{self.__class__.__name__}({attr_repr})"

    def to_registry(self) -> Dict[str, Any]:
        """ Returns a JSON serializable representation of self.

        Warns:
            UserWarning: If any attributes are present in the object
                but not handled by the object's `_to_dict` method.
        """
        attribute_dict = self._to_dict()
        obj_type = f"{self.__module__}.{self.__class__.__name__}"
        unserialized_keys = set(self.__dict__.keys()) - set(attribute_dict.keys())
        if len(unserialized_keys) > 0:
            warnings.warn(
                f"Attributes {unserialized_keys} present in object of "
                f"type {obj_type} but not handled by object's _to_dict "
                f"method. Serialized object may not load correctly.",
                UserWarning,
            )
        return {
            "class": obj_type,
            "attributes": attribute_dict,
            "version": package_version(),
            "dependency_versions": dependency_versions(),
        }

    def to_json(self, path_or_buf: Union[str, IO, None] = None) -> Optional[str]:
        """ Returns a JSON string representing self.

        Args:
            path_or_buf (Union[str, IO]): File path or object. If not
                specified, the result is returned as a string.
        """
        registry = self.to_registry()
        if path_or_buf is None:
            return json.dumps(registry, cls=NpEncoder, indent=2)
        if isinstance(path_or_buf, str):
            with open(path_or_buf, "w") as fh:
                json.dump(registry, fh, cls=NpEncoder, indent=2)
                # Add a newline to the EOF.
                fh.write("\n")
        else:
            json.dump(registry, path_or_buf, cls=NpEncoder, indent=2)
            path_or_buf.write("\n")
        return None

    @classmethod
    def from_json(cls, path_or_buf: Union[str, IO]):
        """ Returns an adafe object loaded from a JSON document.

        Args:
            path_or_buf (Union[str, IO]): a valid JSON str, path or
                file-like object.
        """
        if isinstance(path_or_buf, str):
            if path_or_buf.lstrip().startswith("{"):
                registry = json.loads(path_or_buf)
            else:
                with open(path_or_buf, "r") as fh:
                    registry = json.load(fh)
        else:
            registry = json.load(path_or_buf)
        return cls.from_registry(registry)

    @classmethod
    def from_registry(cls, registry: Dict[str, Any]):
        """ Returns an object of type `cls` from a JSON serializable
        representation of the object.

        Warns:
            UserWarning: If the adafe, numpy or pandas versions recorded
                in the registry differ from the current ones, if the
                serialized class is not `cls`, or if any attributes were
                not handled by `_from_dict`.
        """
        version = registry.get("version")
        if version is not None and version != package_version():
            warnings.warn(
                f"Version {version} of input adafe object does not match "
                f"current version {package_version()}.",
                UserWarning,
            )
        recorded = registry.get("dependency_versions")
        if recorded is not None:
            current = dependency_versions()
            for pkg, pkg_version in recorded.items():
                if current.get(pkg) != pkg_version:
                    warnings.warn(
                        f"Current version of dependency {pkg} does not "
                        f"match serialized version. "
                        f"Current: {current.get(pkg)}, "
                        f"Serialized: {pkg_version}.",
                        UserWarning,
                    )
        obj_type = registry["class"]
        if obj_type != f"{cls.__module__}.{cls.__name__}":
            target = locate(obj_type)
            if isinstance(target, type) and issubclass(target, cls):
                cls = target
            else:
                warnings.warn(
                    f"Deserializing as type {cls.__module__}.{cls.__name__}. "
                    f"Object was serialized as type {obj_type}.",
                    UserWarning,
                )
        attribute_dict = registry["attributes"]
        out_obj = cls._from_dict(attribute_dict)
        unloaded = set(attribute_dict.keys()) - set(out_obj.__dict__.keys())
        if len(unloaded) > 0:
            warnings.warn(
                f"Attributes {unloaded} present in object of type "
                f"{obj_type} but not handled by object's _from_dict "
                f"method. Loaded object may have inaccurate attributes.",
                UserWarning,
            )
        return out_obj

    def _to_dict(self) -> Dict[str, Any]:
        """ Converts the object's attributes into a JSON serializable
        dict. Each adafe object defines this method differently.
        """
        raise NotImplementedError

    @classmethod
    def _from_dict(cls, attribute_dict: Dict[str, Any]) -> "BaseFrontendObj":
        """ Converts a JSON serializable representation of an adafe
        object into an actual object.
        """
        raise NotImplementedError
