/*
 Copyright 2026 The fracstab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef FRACSTAB_ERROR_HPP
#define FRACSTAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fracstab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input (orders, documents).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A value is outside the range an operation supports.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Matrix or vector shapes are inconsistent.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical routine did not converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Controller matrices could not be recovered from an LMI solution.
class RecoveryError : public Error {
public:
    using Error::Error;
};

} // namespace fracstab

#endif // FRACSTAB_ERROR_HPP
