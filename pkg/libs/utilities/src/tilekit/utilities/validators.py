import math
import numbers
import typing as t


class Validators:
    """
    All validators should return their value[s] if valid,
    else raise a ValueError
    """

    class Integers:
        @classmethod
        def check_type(cls, value: int, name: str) -> int:
            # bool is an int subclass but never a meaningful scale or count
            if isinstance(value, numbers.Integral) and not isinstance(value, bool):
                return int(value)
            else:
                raise ValueError(f"Parameter {name} must be an int")

        @classmethod
        def greater_than_zero(cls, value: int, name: str) -> int:
            """

            Parameters
            ----------
            value: int
            name: str
                Used in the error messages only.
            Returns
            -------
            """
            value = cls.check_type(value, name)
            if not (value > 0):
                raise ValueError(f"Parameter {name} must be greater than zero")
            return value

        @classmethod
        def non_negative(cls, value: int, name: str) -> int:
            value = cls.check_type(value, name)
            if value < 0:
                raise ValueError(f"Parameter {name} must be non-negative")
            return value

        @classmethod
        def non_positive(cls, value: int, name: str) -> int:
            value = cls.check_type(value, name)
            if value > 0:
                raise ValueError(f"Parameter {name} must be non-positive")
            return value

        @classmethod
        def at_least(cls, value: int, minimum: int, name: str) -> int:
            value = cls.check_type(value, name)
            if value < minimum:
                raise ValueError(f"Parameter {name} must be at least {minimum}")
            return value

    class Floats:
        @classmethod
        def check_type(cls, value: float, name: str) -> float:
            if isinstance(value, numbers.Real) and not isinstance(value, bool):
                value = float(value)
                if math.isfinite(value):
                    return value
            raise ValueError(f"Parameter {name} must be a finite real number")

        @classmethod
        def greater_than_zero(cls, value: float, name: str) -> float:
            value = cls.check_type(value, name)
            if not (value > 0):
                raise ValueError(f"Parameter {name} must be greater than zero")
            return value

        @classmethod
        def non_negative(cls, value: float, name: str) -> float:
            value = cls.check_type(value, name)
            if value < 0:
                raise ValueError(f"Parameter {name} must be non-negative")
            return value

        @classmethod
        def in_open_interval(
            cls, value: float, lower: float, upper: float, name: str
        ) -> float:
            value = cls.check_type(value, name)
            if not (lower < value < upper):
                raise ValueError(
                    f"Parameter {name} must lie strictly between {lower} and {upper}"
                )
            return value

        @classmethod
        def in_closed_interval(
            cls, value: float, lower: float, upper: float, name: str
        ) -> float:
            value = cls.check_type(value, name)
            if not (lower <= value <= upper):
                raise ValueError(
                    f"Parameter {name} must lie between {lower} and {upper} inclusive"
                )
            return value

        @classmethod
        def power_of_two(cls, value: float, name: str) -> int:
            """
            Returns the exponent j with value == 2 ** j.
            """
            value = cls.greater_than_zero(value, name)
            mantissa, exponent = math.frexp(value)
            if mantissa != 0.5:
                raise ValueError(f"Parameter {name} must be a power of two")
            return exponent - 1

    class Sequences:
        @classmethod
        def integer_vector(
            cls, value: t.Sequence[int], name: str, length: t.Optional[int] = None
        ) -> t.Tuple[int, ...]:
            if isinstance(value, (str, bytes)) or not isinstance(value, t.Iterable):
                raise ValueError(f"Parameter {name} must be a sequence of ints")
            result = tuple(
                Validators.Integers.check_type(v, f"{name}[{i}]")
                for i, v in enumerate(value)
            )
            if length is not None and len(result) != length:
                raise ValueError(f"Parameter {name} must have length {length}")
            return result

        @classmethod
        def bit_vector(
            cls, value: t.Sequence[int], name: str, length: t.Optional[int] = None
        ) -> t.Tuple[int, ...]:
            result = cls.integer_vector(value, name, length)
            if any(v not in (0, 1) for v in result):
                raise ValueError(f"Parameter {name} must only contain 0 and 1")
            return result

        @classmethod
        def nonzero_bit_vector(
            cls, value: t.Sequence[int], name: str, length: t.Optional[int] = None
        ) -> t.Tuple[int, ...]:
            result = cls.bit_vector(value, name, length)
            if not any(result):
                raise ValueError(f"Parameter {name} must not be the zero vector")
            return result
