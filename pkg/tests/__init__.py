# tests package 